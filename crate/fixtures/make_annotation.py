"""Writes flagellazione.annotation.json by direct pinhole projection.

Independent of the Rust code: marks are computed here from the scene
numbers in flagellazione.scene with plain arithmetic.
"""
import json

H, D = 60.0, 145.0
W, HC = 200.0, 140.0
TILE = 40.0
KNEE = 60.0  # knee height of a 174 cm figure


def mark(x, y, z):
    # bottom-left canvas cm of the floor-frame point (x, y, z)
    return [round(W / 2 + x * D / y, 6), round(H + (z - H) * D / y, 6)]


figures = []
for label, x, depth in [("flagellant left", -40, 290), ("column", 10, 400), ("flagellant right", 45, 520)]:
    figures.append({
        "label": label,
        "base": mark(x, depth, 0.0),
        "top": mark(x, depth, 174.0),
        "knee": mark(x, depth, KNEE),
        "assumed_real_height": 174.0,
    })

diagonals = []
for j, i in [(0, 0), (2, 1), (3, 3)]:
    x0 = -100.0 + j * TILE
    y0 = D + i * TILE
    diagonals.append({
        "p1": mark(x0, y0, 0.0),
        "p2": mark(x0 + TILE, y0 + TILE, 0.0),
        "assume_square_tile": True,
    })

doc = {
    "schema": 1,
    "canvas_width": W,
    "canvas_height": HC,
    "vp": [W / 2, H],
    "figures": figures,
    "diagonals": diagonals,
}
with open("flagellazione.annotation.json", "w") as f:
    json.dump(doc, f, indent=2)
    f.write("\n")
