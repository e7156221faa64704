"""Reference values copied by hand from the published tables, kept apart from the package data."""

# combined drag + upwash/downwash power in W at Beaufort 5, 15.6 m/s
COMBINED_W = {
    ("COLUMN", "FRONT"): 1858.78, ("COLUMN", "RIGHT"): 3235.33, ("COLUMN", "LEFT"): 3237.27,
    ("FRONT", "FRONT"): 2869.90, ("FRONT", "RIGHT"): 1498.56, ("FRONT", "LEFT"): 1500.64,
    ("ECHELON", "FRONT"): 1576.44, ("ECHELON", "RIGHT"): 1579.35, ("ECHELON", "LEFT"): 1578.85,
    ("VEE", "FRONT"): 1337.69, ("VEE", "RIGHT"): 3121.24, ("VEE", "LEFT"): 3131.37,
    ("DIAMOND", "FRONT"): 1367.50, ("DIAMOND", "RIGHT"): 1365.35, ("DIAMOND", "LEFT"): 1354.63,
}

# average drag in N over the five drones
AVG_DRAG_N = {
    ("COLUMN", "FRONT"): 95.87, ("COLUMN", "RIGHT"): 184.11, ("COLUMN", "LEFT"): 184.24,
    ("FRONT", "FRONT"): 183.97, ("FRONT", "RIGHT"): 96.06, ("FRONT", "LEFT"): 96.19,
    ("ECHELON", "FRONT"): 169.21, ("ECHELON", "RIGHT"): 169.40, ("ECHELON", "LEFT"): 169.37,
    ("VEE", "FRONT"): 153.91, ("VEE", "RIGHT"): 268.24, ("VEE", "LEFT"): 268.89,
    ("DIAMOND", "FRONT"): 144.18, ("DIAMOND", "RIGHT"): 144.04, ("DIAMOND", "LEFT"): 143.36,
}

VEE_FRONT_DRAG_N = (184.41, 133.87, 131.27, 152.18, 167.81)
COLUMN_FRONT_DRAG_N = (134.40, 93.88, 90.39, 81.40, 79.29)

REF_SPEED = 15.6
BATTERY_WH = 4480 * 15.2 / 1000


def updown_oracle(formation, direction):
    return COMBINED_W[formation, direction] - AVG_DRAG_N[formation, direction] * REF_SPEED
