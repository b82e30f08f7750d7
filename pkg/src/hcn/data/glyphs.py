"""Pixel-art fixtures: a 5x7 letter font, bar/symbol/shape glyphs.

These are versioned test assets; generators place them on canvases.  The two
shape traits (holed square, ring) carry the same number of pixels, as do the
two diagonals, so every shape-plus-diagonal template activates an equal pixel
budget.
"""

import numpy as np


def _bitmap(rows):
    return np.array([[1 if ch == "#" else 0 for ch in row] for row in rows],
                    dtype=np.uint8)


FONT_5X7 = {
    "A": _bitmap([".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    "B": _bitmap(["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."]),
    "C": _bitmap([".####", "#....", "#....", "#....", "#....", "#....", ".####"]),
    "D": _bitmap(["####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."]),
    "E": _bitmap(["#####", "#....", "#....", "####.", "#....", "#....", "#####"]),
    "F": _bitmap(["#####", "#....", "#....", "####.", "#....", "#....", "#...."]),
    "G": _bitmap([".####", "#....", "#....", "#.###", "#...#", "#...#", ".###."]),
    "H": _bitmap(["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    "I": _bitmap(["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"]),
    "J": _bitmap(["..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."]),
    "K": _bitmap(["#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"]),
    "L": _bitmap(["#....", "#....", "#....", "#....", "#....", "#....", "#####"]),
    "M": _bitmap(["#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"]),
    "N": _bitmap(["#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"]),
    "O": _bitmap([".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."]),
    "P": _bitmap(["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."]),
    "Q": _bitmap([".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"]),
    "R": _bitmap(["####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"]),
    "S": _bitmap([".####", "#....", "#....", ".###.", "....#", "....#", "####."]),
    "T": _bitmap(["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    "U": _bitmap(["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."]),
    "V": _bitmap(["#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."]),
    "W": _bitmap(["#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"]),
    "X": _bitmap(["#...#", ".#.#.", "..#..", "..#..", "..#..", ".#.#.", "#...#"]),
    "Y": _bitmap(["#...#", ".#.#.", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    "Z": _bitmap(["#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"]),
}

HBAR_7 = _bitmap(["." * 7] * 3 + ["#" * 7] + ["." * 7] * 3)
VBAR_7 = HBAR_7.T.copy()

SYMBOLS_9 = {
    "plus": _bitmap(["....#....", "....#....", "....#....", "....#....",
                     "#########", "....#....", "....#....", "....#....",
                     "....#...."]),
    "diamond": _bitmap(["....#....", "...#.#...", "..#...#..", ".#.....#.",
                        "#.......#", ".#.....#.", "..#...#..", "...#.#...",
                        "....#...."]),
    "cross": _bitmap(["#.......#", ".#.....#.", "..#...#..", "...#.#...",
                      "....#....", "...#.#...", "..#...#..", ".#.....#.",
                      "#.......#"]),
    "ring": _bitmap([".........", ".#######.", ".#.....#.", ".#.....#.",
                     ".#.....#.", ".#.....#.", ".#.....#.", ".#######.",
                     "........."]),
}

# shape traits for the two-trait synthetic set; the square (with four edge
# holes) and the ring both light 20 pixels
SQUARE_HOLES_7 = _bitmap(["###.###", "#.....#", "#.....#", ".......",
                          "#.....#", "#.....#", "###.###"])
RING_7 = _bitmap([".#####.", "#.....#", "#.....#", "#.....#",
                  "#.....#", "#.....#", ".#####."])
FDIAG_7 = np.fliplr(np.eye(7, dtype=np.uint8)).copy()
BDIAG_7 = np.eye(7, dtype=np.uint8)
