"""Printed reference values: rank/exponent tables and leading coefficients."""

# n0: (previous t, new t, previous omega, new omega)
ONE_LEVEL = {
    28: (10556, 10550, 2.780277, 2.780106),
    30: (12704, 12688, 2.778337, 2.777967),
    32: (15113, 15096, 2.776701, 2.776376),
    34: (17808, 17790, 2.775498, 2.775211),
    36: (20805, 20786, 2.774633, 2.774378),
    38: (24120, 24100, 2.774037, 2.773809),
    40: (27769, 27748, 2.773655, 2.77345),
    42: (31768, 31746, 2.773444, 2.773258),
    44: (36133, 36110, 2.773372, 2.773203),
    46: (40880, 40856, 2.773412, 2.773258),
    48: (46025, 46000, 2.773543, 2.773403),
    50: (51584, 51558, 2.773749, 2.77362),
    60: (86149, 86118, 2.775496, 2.775408),
}

# the "previous" entry at 28 comes from a different construction
ONE_LEVEL_PREVIOUS_FROM_OTHER_SOURCE = {28}

# m0: (pan^2 t, new^2 t, new25b t, omega pan^2, omega new^2, omega new25b)
TWO_LEVEL = {
    28: (111619225, 111302500, 111258400, 2.780533, 2.780106, 2.780047),
    30: (161391616, 160985344, 160927744, 2.778337, 2.777967, 2.777914),
    32: (228402769, 227889216, 227815232, 2.776701, 2.776376, 2.776329),
    34: (317124864, 316484100, 316390464, 2.775498, 2.775211, 2.775169),
    36: (432848025, 432057796, 431940832, 2.774633, 2.774378, 2.774340),
    38: (581774400, 580810000, 580665600, 2.774037, 2.773809, 2.773775),
    40: (771117361, 769951504, 769775104, 2.773655, 2.773450, 2.773418),
    42: (1009205824, 1007808516, 1007595072, 2.773444, 2.773258, 2.773230),
    44: (1305593689, 1303932100, 1303676064, 2.773372, 2.773203, 2.773177),
    46: (1671174400, 1669212736, 1668908032, 2.773412, 2.773258, 2.773234),
    48: (2118300625, 2116000000, 2115640000, 2.773543, 2.773403, 2.773381),
    50: (2660909056, 2658227364, 2657804864, 2.773749, 2.773620, 2.773600),
    60: (7421650201, 7416309924, 7415445024, 2.775496, 2.775408, 2.775394),
}

LEADING_COEFFICIENT = {
    20: 8.419,
    30: 8.265,
    40: 8.193,
    42: 8.183,
    44: 8.174,
    46: 8.165,
    48: 8.158,
    50: 8.151,
    60: 8.124,
}

# sparsity statistics of the decomposed algorithm: n0 -> [(nnz, nns)] for U_phi, V_phi, W_phi
SPARSITY = {
    20: [(12089, 44), (12166, 154), (12133, 1540)],
    44: [(103661, 92), (103822, 322), (103753, 6532)],
}

WORKED_EXAMPLE_44 = {"q_U": 67643, "q_V": 68034, "q_W": 108169, "c": 8.174}

OPTIMAL = {"new25": (44, 2.773203), "new25b": (1936, 2.773177)}

STRASSEN_EXPONENT = 2.807355
