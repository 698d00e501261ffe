import json

import pytest
from hypothesis import given, strategies as st

from blockrepair.lang import ParseError, trees_equal_normalized
from blockrepair.minilang import (
    Interpreter,
    MiniJavaLanguage,
    MiniRuntimeError,
    check_project,
    print_program,
    run_project_tests,
)

lang = MiniJavaLanguage()

SAMPLE = """\
class Math {
  int fact(int n) {
    int acc = 1;
    for (int i = 1; i <= n; i++) {
      acc = acc * i;
    }
    return acc;
  }
}
"""


class TestLexerParser:
    def test_tokenize(self):
        assert lang.tokenize("x <= 10;") == ["x", "<=", "10", ";"]

    def test_tokenize_falls_back_on_garbage(self):
        assert lang.tokenize("x ? y") == ["x", "?", "y"]

    def test_parse_error_carries_line(self):
        with pytest.raises(ParseError) as info:
            lang.parse("int f() {\n  return (1;\n}")
        assert info.value.line >= 1

    def test_comments_ignored(self):
        tree = lang.parse("// leading\nint x = 1; // trailing\n")
        assert tree.kind == "program"


class TestPrinter:
    def test_normalize_idempotent(self):
        once = lang.normalize(SAMPLE)
        assert lang.normalize(once) == once

    def test_normalize_canonicalizes_spacing(self):
        a = lang.normalize("int f(int x){return x+1;}")
        b = lang.normalize("int f ( int x ) { return (x + 1) ; }")
        assert a == b

    def test_unparsable_text_passes_through(self):
        assert lang.normalize("not a program {{{") == "not a program {{{"

    def test_print_parse_round_trip(self):
        printed = print_program(lang.parse(SAMPLE))
        assert print_program(lang.parse(printed)) == printed


class TestLineClassifiers:
    def test_comment_line(self):
        assert lang.is_comment_line("  // note")
        assert not lang.is_comment_line("x = 1; // note")

    @pytest.mark.parametrize("line,expected", [
        (";", True),
        ("for (int i = 0; i < 10; i++);", True),
        ("while (x < 3);", True),
        ("x = 1;", False),
        ("{ }", True),
        ("return;", False),
    ])
    def test_null_line(self, line, expected):
        assert lang.is_null_line(line) is expected


class TestTreeEquality:
    def test_whitespace_insensitive(self):
        assert trees_equal_normalized(
            "int f(){return 1;}", "int f() {\n  return 1;\n}", lang)

    def test_semantic_difference_detected(self):
        assert not trees_equal_normalized(
            "int f(){return 1;}", "int f(){return 2;}", lang)

    def test_unparsable_falls_back_to_text(self):
        assert not trees_equal_normalized("{{{", "}}}", lang)


class TestInterpreter:
    def run(self, source, call):
        return Interpreter(lang.parse(source)).call_text(call)

    def test_factorial(self):
        assert self.run(SAMPLE, "fact(5)") == 120

    def test_strings_and_bools(self):
        src = "str greet(bool loud) { if (loud) { return \"HI\"; } return \"hi\"; }"
        assert self.run(src, "greet(true)") == "HI"
        assert self.run(src, "greet(false)") == "hi"

    def test_while_and_postfix(self):
        src = """
        int count(int n) {
          int c = 0;
          while (n > 0) { n--; c++; }
          return c;
        }
        """
        assert self.run(src, "count(7)") == 7

    def test_infinite_loop_hits_step_budget(self):
        src = "int spin() { while (true) { } return 0; }"
        with pytest.raises(MiniRuntimeError, match="step budget"):
            self.run(src, "spin()")

    def test_undefined_function(self):
        with pytest.raises(MiniRuntimeError, match="nope"):
            self.run("int f() { return 1; }", "nope()")

    def test_division_by_zero(self):
        with pytest.raises(MiniRuntimeError):
            self.run("int f(int n) { return 1 / n; }", "f(0)")

    @given(st.integers(-50, 50), st.integers(-50, 50))
    def test_arithmetic_matches_python(self, a, b):
        src = "int add(int x, int y) { return x + y * 2 - x; }"
        assert self.run(src, f"add({a}, {b})") == a + b * 2 - a


class TestProjectEntryPoints:
    def write_project(self, tmp_path, source=SAMPLE, tests=None):
        (tmp_path / "m.mj").write_text(source)
        if tests is not None:
            (tmp_path / "tests.json").write_text(json.dumps(tests))
        return tmp_path

    def test_check_ok(self, tmp_path):
        assert check_project(self.write_project(tmp_path)) == 0

    def test_check_reports_parse_failure(self, tmp_path, capsys):
        root = self.write_project(tmp_path, source="int f( {")
        assert check_project(root) == 1
        assert "m.mj" in capsys.readouterr().err

    def test_run_tests_pass_and_fail(self, tmp_path):
        root = self.write_project(
            tmp_path, tests=[{"call": "fact(4)", "expect": 24}])
        assert run_project_tests(root) == 0
        (tmp_path / "tests.json").write_text(
            json.dumps([{"call": "fact(4)", "expect": 25}]))
        assert run_project_tests(root) == 1

    def test_run_tests_missing_manifest(self, tmp_path):
        assert run_project_tests(self.write_project(tmp_path)) == 1
