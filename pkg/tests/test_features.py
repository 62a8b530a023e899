from linesift.analysis import parse_source
from linesift.diffs import CommitLine
from linesift.features import (
    COMMIT_CONTEXT_FEATURES,
    COMMIT_LINE_FEATURES,
    FEATURE_NAMES,
    FeatureVector,
    extract_context_features,
    extract_intra_commit_features,
    extract_line_features,
)


def _line(line_no, text="", side="post", path="f.c", commit="c1", kind=None):
    kind = kind or ("deleted" if side == "pre" else "added")
    return CommitLine(commit_id=commit, path=path, side=side, kind=kind,
                      line_no=line_no, text=text)


def test_return_zero_only_has_ret():
    unit = parse_source("int f() {\n    return 0;\n}\n")
    feats = extract_line_features(_line(2, "    return 0;"), unit)
    assert feats == {**{n: 0 for n in COMMIT_LINE_FEATURES}, "hasRet": 1}


def test_bool_flag_assignment():
    src = """\
int f() {
    bool done = false;
    done = true;
    return 0;
}
"""
    unit = parse_source(src)
    feats = extract_line_features(_line(3, "    done = true;"), unit)
    assert feats["assignment"] == 1
    assert feats["flagVar"] == 1
    assert feats["isLocal"] == 1
    assert feats["comparator"] == feats["arithmetic"] == feats["logical"] == 0


def test_brace_only_line_is_all_zero():
    src = "int f(int a) {\n    if (a) {\n        a = 1;\n    }\n    return a;\n}\n"
    unit = parse_source(src)
    feats = extract_line_features(_line(4, "    }"), unit)
    assert all(v == 0 for v in feats.values())
    ctx = extract_context_features(_line(4, "    }"), unit)
    assert all(v == 0 for v in ctx.values())


def test_operator_counts_are_ast_based():
    # '==' is one comparator and zero assignments
    unit = parse_source("int f(int a, int b) {\n    if (a == b) {\n        a = 1;\n    }\n    return a;\n}\n")
    feats = extract_line_features(_line(2), unit)
    assert feats["comparator"] == 1
    assert feats["assignment"] == 0


def test_string_literal_and_call():
    unit = parse_source('int f() {\n    log("overflow", 1 + 2);\n    return 0;\n}\n')
    feats = extract_line_features(_line(2), unit)
    assert feats["hasLiteral"] == 1
    assert feats["funcCall"] == 1
    assert feats["arithmetic"] == 1


def test_incdec_counts_arithmetic_unary_minus_does_not():
    unit = parse_source("int f(int n) {\n    n++;\n    int m = -5;\n    return m;\n}\n")
    assert extract_line_features(_line(2), unit)["arithmetic"] == 1
    assert extract_line_features(_line(3), unit)["arithmetic"] == 0


def test_global_variable_not_local():
    src = "int shared = 0;\nint f(int n) {\n    shared = n;\n    return shared;\n}\n"
    unit = parse_source(src)
    feats = extract_line_features(_line(3), unit)
    # n is a parameter, so the line still involves a local
    assert feats["isLocal"] == 1
    only_global = extract_line_features(_line(4), unit)
    assert only_global["isLocal"] == 0
    assert only_global["hasRet"] == 1


def test_single_line_commit_has_no_intra_features():
    src = "int f() {\n    int x = 1;\n    return x;\n}\n"
    unit = parse_source(src)
    units = {("f.c", "post"): unit}
    me = _line(2, "    int x = 1;")
    feats = extract_intra_commit_features(me, [me], units)
    assert all(v == 0 for v in feats.values())


def test_guard_and_use_control_dependence():
    src = """\
int f(int count) {
    if (count == 0) {
        record(count);
    }
    return count;
}
"""
    unit = parse_source(src)
    units = {("f.c", "post"): unit}
    guard = _line(2, "    if (count == 0) {")
    use = _line(3, "        record(count);")
    feats = extract_intra_commit_features(use, [guard, use], units)
    assert feats["controlDepend"] == 1
    guard_feats = extract_intra_commit_features(guard, [guard, use], units)
    assert guard_feats["controlDepend"] == 0


def test_intra_commit_data_dependence():
    src = "int f() {\n    int x = seed();\n    int y = x + 1;\n    return y;\n}\n"
    unit = parse_source(src)
    units = {("f.c", "post"): unit}
    def_line = _line(2, "    int x = seed();")
    use_line = _line(3, "    int y = x + 1;")
    assert extract_intra_commit_features(use_line, [def_line, use_line], units)["depends"] == 1
    assert extract_intra_commit_features(def_line, [def_line, use_line], units)["depends"] == 0


def test_repeated_normalized_text():
    src = "int f(int a) {\n    a = sq_half(a);\n    use(a);\n    a   =   sq_half(a);\n    return a;\n}\n"
    unit = parse_source(src)
    units = {("f.c", "post"): unit}
    l1 = _line(2, "    a = sq_half(a);")
    l2 = _line(4, "    a   =   sq_half(a);")
    feats = extract_intra_commit_features(l1, [l1, l2], units)
    assert feats["repeated"] == 1
    assert feats["repeatedCall"] == 1  # both call sq_half


def test_repeated_control_keyword():
    src = """\
int f(int a) {
    if (a > 1) {
        a = 1;
    }
    if (a > 2) {
        a = 2;
    }
    while (a > 0) {
        a--;
    }
    return a;
}
"""
    unit = parse_source(src)
    units = {("f.c", "post"): unit}
    if1 = _line(2, "    if (a > 1) {")
    if2 = _line(5, "    if (a > 2) {")
    wh = _line(8, "    while (a > 0) {")
    feats = extract_intra_commit_features(if1, [if1, if2, wh], units)
    assert feats["repeatedControl"] == 1
    assert extract_intra_commit_features(wh, [if1, if2, wh], units)["repeatedControl"] == 0


def test_context_if_block_and_controlled_by():
    src = """\
int f(int count, int sum) {
    int mean = 0;
    if (count != 0) {
        mean = sum / count;
    }
    return mean;
}
"""
    unit = parse_source(src)
    feats = extract_context_features(_line(4), unit)
    assert feats["ifBlock"] == 1
    assert feats["controlBlock"] == 1
    assert feats["controlledBy"] == 1
    assert feats["elseBlock"] == 0


def test_else_block_flag():
    src = """\
int f(int a) {
    if (a > 0) {
        a = 1;
    } else {
        a = 2;
    }
    return a;
}
"""
    unit = parse_source(src)
    assert extract_context_features(_line(3), unit)["ifBlock"] == 1
    feats = extract_context_features(_line(5), unit)
    assert feats["elseBlock"] == 1
    assert feats["ifBlock"] == 0


def test_postdominance_counts_straight_line():
    unit = parse_source("int f() {\n    int a = 1;\n    int b = 2;\n    return b;\n}\n")
    last = extract_context_features(_line(4), unit)
    assert last["postDominates"] == 2
    assert last["postDominatedBy"] == 0
    first = extract_context_features(_line(2), unit)
    assert first["postDominates"] == 0
    assert first["postDominatedBy"] == 2


def test_reachable_outside():
    src = "int f() {\n    int x = seed();\n    return x;\n}\n"
    unit = parse_source(src)
    # line 2 added, line 3 unchanged: the def flows to a non-commit line
    feats = extract_context_features(_line(2), unit, commit_line_nos={2})
    assert feats["reachableOutside"] == 1
    # if both lines belong to the commit there is no outside edge
    both = extract_context_features(_line(2), unit, commit_line_nos={2, 3})
    assert both["reachableOutside"] == 0


def test_block_flags_imply_control_block():
    src = """\
int f(int a) {
    while (a > 0) {
        do {
            a--;
        } while (a > 5);
        for (int i = 0; i < 3; i++) {
            try {
                switch (i) {
                case 0:
                    touch(i);
                }
            } catch (int e) {
                a = e;
            }
        }
    }
    return a;
}
"""
    unit = parse_source(src)
    for ln in (3, 4, 6, 7, 8, 9, 10, 12, 13):
        feats = extract_context_features(_line(ln), unit)
        specific = [feats[n] for n in ("doBlock", "ifBlock", "elseBlock", "switchBlock",
                                       "tryBlock", "forBlock", "whileBlock")]
        if any(specific):
            assert feats["controlBlock"] == 1
    deep = extract_context_features(_line(10), unit)
    assert deep["switchBlock"] == deep["tryBlock"] == deep["forBlock"] == deep["whileBlock"] == 1


def test_feature_vector_is_numbers_only():
    vec = FeatureVector()
    assert all(isinstance(v, int) for v in vec.to_dict().values())
    assert len(FEATURE_NAMES) == 27
    assert len(COMMIT_LINE_FEATURES) == 9
    assert len(COMMIT_CONTEXT_FEATURES) == 13
