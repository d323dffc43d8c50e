"""Regenerate the bundled benchmark sources (.imp, .ce.json, .labels.json).

Each program is written as {line: text}; gaps become blank lines so every
statement lands on the line number its fixtures refer to.  ``fix`` maps the
faulty lines to their correct text, which rebuilds the reference version.
"""
from __future__ import annotations

import json
import pathlib
import sys

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "locfaults" / "corpus"


def render(lines: dict) -> str:
    last = max(lines)
    return "\n".join(lines.get(i, "") for i in range(1, last + 1)) + "\n"


def header(title, *about):
    out = {1: f"// {title}"}
    for n, t in enumerate(about, start=2):
        out[n] = f"// {t}"
    return out


ABS = {
    9: "prog AbsMinus(int i, int j) {",
    10: "  pre true;",
    11: "  int result;",
    12: "  int k = 0;",
    13: "  if (i <= j) {",
    14: "    k = k + 1;",
    15: "  }",
    16: "  if (k == 1 && i != j) {",
    17: "    result = j - i;",
    18: "  }",
    19: "  else {",
    20: "    result = i - j;",
    21: "  }",
    22: "  post result == 1;",
    23: "}",
}

MINMAX = {
    7: "prog Minmax(int in1, int in2, int in3) {",
    8: "  pre true;",
    10: "  int least = in1;",
    11: "  int most = in1;",
    12: "  if (most < in2) {",
    13: "    most = in2;",
    14: "  }",
    15: "  if (most < in3) {",
    16: "    most = in3;",
    17: "  }",
    18: "  if (least > in2) {",
    19: "    least = in2;",
    20: "  }",
    21: "  if (least > in3) {",
    22: "    least = in3;",
    23: "  }",
    24: "  post least <= most;",
    25: "}",
}

MID = {
    8: "prog Mid(int a, int b, int c) {",
    9: "  pre true;",
    11: "  int m = c;",
    14: "  if (b < c) {",
    15: "    if (a < b) {",
    16: "      m = b;",
    17: "    }",
    18: "    else if (a < c) {",
    19: "      m = a;",
    20: "    }",
    21: "  }",
    22: "  else {",
    23: "    if (a > b) {",
    24: "      m = b;",
    25: "    }",
    26: "    else if (a > c) {",
    27: "      m = a;",
    28: "    }",
    29: "  }",
    30: "  post m == 2;",
    31: "}",
}


def maxmin6var():
    p = {
        9: "prog Maxmin6var(int a, int b, int c, int d, int e, int f) {",
        10: "  pre true;",
        11: "  int max = a;",
    }
    line = 12
    for v in "bcdef":
        p[line] = f"  if ({v} > max) {{"
        p[line + 1] = f"    max = {v};"
        p[line + 2] = "  }"
        line += 3
    p[27] = "  int min = a;"
    line = 28
    for v in "bcdef":
        p[line] = f"  if ({v} < min) {{"
        p[line + 1] = f"    min = {v};"
        p[line + 2] = "  }"
        line += 3
    p[43] = "  post max == 1 && min == MIN;"
    p[44] = "}"
    return p


def tritype_a():
    """Layout of TritypeKO/KO2/KO3."""
    return {
        18: "prog Tritype(int i, int j, int k) {",
        19: "  pre i >= 0 && j >= 0 && k >= 0;",
        20: "  int trityp;",
        21: "  if (i == 0 || j == 0 || k == 0) {",
        22: "    trityp = 4;",
        23: "  }",
        24: "  else {",
        25: "    trityp = 0;",
        26: "    if (i == j) {",
        27: "      trityp = trityp + 1;",
        28: "    }",
        29: "    if (i == k) {",
        30: "      trityp = trityp + 2;",
        31: "    }",
        32: "    if (j == k) {",
        33: "      trityp = trityp + 3;",
        34: "    }",
        35: "    if (trityp == 0) {",
        36: "      if (i + j <= k || j + k <= i || i + k <= j) {",
        37: "        trityp = 4;",
        38: "      }",
        39: "      else {",
        40: "        trityp = 1;",
        41: "      }",
        42: "    }",
        43: "    else {",
        44: "      if (trityp > 3) {",
        45: "        trityp = 3;",
        46: "      }",
        47: "      else {",
        48: "        if (trityp == 1 && i + j > k) {",
        49: "          trityp = 2;",
        50: "        }",
        51: "        else {",
        52: "          // remaining isosceles cases",
        53: "          if (trityp == 2 && i + k > j) {",
        54: "            trityp = 2;",
        55: "          }",
        56: "          else {",
        57: "            if (trityp == 3 && j + k > i) {",
        58: "              trityp = 2;",
        59: "            }",
        60: "            else {",
        61: "              trityp = 4;",
        62: "            }",
        63: "          }",
        64: "        }",
        65: "      }",
        66: "    }",
        67: "  }",
        68: "  post trityp == POST;",
        69: "}",
    }


def tritype_v2():
    """KO2V2 layout: one extra line inside the i == k branch."""
    a = tritype_a()
    out = {}
    for n, t in a.items():
        out[n if n < 30 else n + 1] = t
    out[30] = "      // i and k are equal"
    return out


def tritype_b():
    """KO4/KO5/KO6 layout: the equilateral test sits one line lower."""
    a = tritype_a()
    out = {n: t for n, t in a.items() if n <= 42}
    body = [
        "    else",
        "    {",
        "      if (trityp > 3) {",
        "        trityp = 3;",
        "      }",
        "      else {",
        "        if (trityp == 1 && i + j > k) {",
        "          trityp = 2;",
        "        }",
        "        else {",
        "          if (trityp == 2 && i + k > j) {",
        "            trityp = 2;",
        "          }",
        "          else {",
        "            if (trityp == 3 && j + k > i) {",
        "              trityp = 2;",
        "            }",
        "            else {",
        "              trityp = 4;",
        "            }",
        "          }",
        "        }",
        "      }",
        "    }",
        "  }",
        "  post trityp == POST;",
        "}",
    ]
    for n, t in enumerate(body, start=43):
        out[n] = t
    return out


def triperimetre():
    return {
        20: "prog TriPerimetre(int i, int j, int k) {",
        21: "  pre i >= 0 && j >= 0 && k >= 0;",
        22: "  int trityp;",
        23: "  int res;",
        24: "  if (i == 0 || j == 0 || k == 0) {",
        25: "    res = -1;",
        26: "  } else {",
        27: "    trityp = 0;",
        28: "    if (i == j) {",
        29: "      trityp = trityp + 1;",
        30: "    }",
        31: "    if (i == k) {",
        32: "      trityp = trityp + 2;",
        33: "    }",
        34: "    if (j == k) {",
        35: "      trityp = trityp + 3;",
        36: "    }",
        37: "    if (trityp == 0) {",
        38: "      if (i + j <= k || j + k <= i || i + k <= j) {",
        39: "        res = -1;",
        40: "      }",
        41: "      else {",
        42: "        res = i + j + k;",
        43: "      }",
        44: "    }",
        45: "    else {",
        46: "      if (trityp > 3) {",
        47: "        res = 3 * i;",
        48: "      }",
        49: "      else {",
        50: "        if (trityp == 1 && i + j > k) {",
        51: "          res = 2 * i + k;",
        52: "        }",
        53: "        else {",
        54: "          // two equal sides: perimeter from",
        55: "          // the repeated side",
        56: "          if (trityp == 2 && i + k > j) {",
        57: "",
        58: "            res = 2 * i + j;",
        59: "          }",
        60: "          else {",
        61: "            if (trityp == 3 && j + k > i) {",
        62: "              res = i + 2 * j;",
        63: "            }",
        64: "            else {",
        65: "              res = -1;",
        66: "            }",
        67: "          }",
        68: "        }",
        69: "      }",
        70: "    }",
        71: "  }",
        72: "  post res == POST;",
        73: "}",
    }


def _stmt_lines(src: dict) -> list:
    """Lines carrying a condition or an assignment (the reportable labels)."""
    out = []
    for n, t in src.items():
        s = t.strip()
        if not s or s.startswith(("//", "prog", "pre ", "post ", "}")) or s in ("else", "{", "else {"):
            continue
        if s.startswith("int ") and "=" not in s:
            continue
        out.append(n)
    return sorted(out)


def _replace(src: dict, line: int, text: str) -> dict:
    out = dict(src)
    old = out[line]
    indent = old[: len(old) - len(old.lstrip())]
    out[line] = indent + text
    return out


# name, family, layout, title, ce, {line: faulty text}, reference fault lines, post template, note
VARIANTS = [
    ("AbsMinusKO", "AbsMinus", ABS, {"i": 0, "j": 1}, {17: "result = i - j;"}, [17], None,
     "faulty assignment in the i < j branch"),
    ("AbsMinusKO2", "AbsMinus", ABS, {"i": 0, "j": 1}, {13: "if (i >= j) {"}, [11], None,
     "own variant: faulty comparison in the first test (the reference variant's fault "
     "is on a declaration line that this language has no counterpart for)"),
    ("AbsMinusKO3", "AbsMinus", ABS, {"i": 0, "j": 1}, {14: "k = k + 2;"}, [14], None,
     "faulty increment of k"),
    ("MinmaxKO", "Minmax", MINMAX, {"in1": 2, "in2": 1, "in3": 3}, {19: "most = in2;"}, [19], None,
     "wrong target variable; POST is least <= most"),
    ("MidKO", "Mid", MID, {"a": 2, "b": 1, "c": 3}, {19: "m = b;"}, [19], None,
     "wrong value assigned to the middle"),
    ("Maxmin6varKO", "Maxmin6var", None, {"a": 1, "b": -4, "c": -3, "d": -1, "e": 0, "f": -4},
     {15: "if (c < max) {"}, [27], "max == {max} && min == {min}",
     "own layout: one inverted comparison in the max scan"),
    ("Maxmin6varKO2", "Maxmin6var", None, {"a": 1, "b": -3, "c": 0, "d": -2, "e": -1, "f": -2},
     {12: "if (b < max) {"}, [12], "max == {max} && min == {min}",
     "own layout: one inverted comparison in the max scan"),
    ("Maxmin6varKO3", "Maxmin6var", None, {"a": 1, "b": -3, "c": 0, "d": -2, "e": -1, "f": -2},
     {12: "if (b < max) {", 15: "if (c < max) {"}, [12, 15], "max == {max} && min == {min}",
     "own layout: two inverted comparisons, both must be deviated"),
    ("Maxmin6varKO4", "Maxmin6var", None, {"a": 1, "b": -3, "c": -4, "d": -2, "e": -1, "f": -2},
     {12: "if (b < max) {", 15: "if (c < max) {", 18: "if (d < max) {"}, [12, 15, 19],
     "max == {max} && min == {min}",
     "own layout: three inverted comparisons, all must be deviated"),
    ("TritypeKO", "Tritype", "a", {"i": 2, "j": 3, "k": 2}, {54: "trityp = 1;"}, [54],
     "trityp == {trityp}", "wrong classification value"),
    ("TritypeKO2", "Tritype", "a", {"i": 2, "j": 2, "k": 4},
     {53: "if (trityp == 1 && i + k > j) {"}, [53], "trityp == {trityp}", "wrong trityp test"),
    ("TritypeKO2V2", "Tritype", "v2", {"i": 1, "j": 2, "k": 1}, {31: "trityp = trityp + 1;"}, [31],
     "trityp == {trityp}", "wrong increment; one extra line in the i == k branch"),
    ("TritypeKO3", "Tritype", "a", {"i": 1, "j": 2, "k": 1},
     {53: "if (trityp == 2 && i + k >= j) {"}, [53], "trityp == {trityp}",
     "non-strict triangle inequality"),
    ("TritypeKO4", "Tritype", "b", {"i": 2, "j": 3, "k": 3}, {45: "if (trityp >= 3) {"}, [45],
     "trityp == {trityp}", "equilateral test too weak"),
    ("TritypeKO5", "Tritype", "b", {"i": 2, "j": 3, "k": 3},
     {32: "if (j != k) {", 45: "if (trityp >= 3) {"}, [32, 45], "trityp == {trityp}",
     "two faulty conditions"),
    ("TritypeKO6", "Tritype", "b", {"i": 2, "j": 3, "k": 3},
     {32: "if (j != k) {", 33: "trityp = trityp + 4;"}, [32, 33], "trityp == {trityp}",
     "faulty condition and faulty increment"),
    ("TriPerimetreKO", "TriPerimetre", None, {"i": 2, "j": 1, "k": 2}, {58: "res = 2 * i - j;"}, [58],
     "res == {res}", "wrong perimeter formula"),
    ("TriPerimetreKOV2", "TriPerimetre", None, {"i": 2, "j": 3, "k": 2},
     {32: "trityp = trityp + 1;"}, [34], "res == {res}",
     "own variant: wrong increment in the i == k branch"),
]

TITLES = {
    "AbsMinus": ("AbsMinus: result is the absolute value of i - j.",),
    "Minmax": ("Minmax: least and most receive the smallest and",
               "largest of the three inputs."),
    "Mid": ("Mid: m receives the median of a, b and c.",),
    "Maxmin6var": ("Maxmin6var: max and min of six inputs.",),
    "Tritype": ("Tritype: classifies the triangle with sides i, j, k.",
                "3 equilateral, 2 isosceles, 1 scalene, 4 not a triangle."),
    "TriPerimetre": ("TriPerimetre: same control structure as Tritype;",
                     "res is the perimeter of a valid triangle, -1 otherwise."),
}


def base_for(family, layout):
    if family == "AbsMinus":
        return ABS
    if family == "Minmax":
        return MINMAX
    if family == "Mid":
        return MID
    if family == "Maxmin6var":
        return maxmin6var()
    if family == "TriPerimetre":
        return triperimetre()
    return {"a": tritype_a, "v2": tritype_v2, "b": tritype_b}[layout]()


def main():
    sys.path.insert(0, str(OUT.parents[1]))
    from locfaults.lang import execute, parse

    OUT.mkdir(parents=True, exist_ok=True)
    for name, family, layout, ce, faults, reference_faults, post, note in VARIANTS:
        base = base_for(family, None if isinstance(layout, dict) else layout)
        src = dict(base)
        for n, t in enumerate(TITLES[family], start=1):
            src[n] = f"// {t}"
        if post is not None:
            # POST is the output of the correct version on the counterexample
            tmp = {n: t.replace("POST", "0").replace("MIN", "0") for n, t in src.items()}
            final = execute(parse(render(tmp)), ce)
            post_line = next(n for n, t in src.items() if t.strip().startswith("post "))
            src[post_line] = "  post " + post.format(**final) + ";"
        correct = dict(src)
        fix = {}
        for line, text in faults.items():
            fix[str(line)] = correct[line].strip()
            src = _replace(src, line, text)
        prog = parse(render(src))
        ref = parse(render(correct))
        assert prog.name == family and ref.name == family
        labels = {
            "name": name,
            "family": family,
            "faults": sorted(faults),
            "fix": fix,
            "reference_faults": reference_faults,
            # own-design variants have no line correspondence to record
            "reference_lines": ({} if note.startswith("own") else {str(n): n for n in _stmt_lines(src)}),
            "note": note,
        }
        (OUT / f"{name}.imp").write_text(render(src))
        (OUT / f"{name}.ce.json").write_text(json.dumps(ce, indent=2) + "\n")
        (OUT / f"{name}.labels.json").write_text(json.dumps(labels, indent=2, sort_keys=True) + "\n")
        print("wrote", name)


if __name__ == "__main__":
    main()
