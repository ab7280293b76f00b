import subprocess
import sys

import pytest

from oracles import certificate_holds, witness_holds
from soskit.cli import main
from soskit.constructions import binary_separator, dual_example, hurwitz, motzkin
from soskit.forms import variable
from soskit.textio import format_form, parse_certificate, parse_form, parse_witness

x, y = variable(2, 0), variable(2, 1)


@pytest.fixture
def form_file(tmp_path):
    def write(p, name="p.form"):
        path = tmp_path / name
        path.write_text(format_form(p))
        return str(path)

    return write


def records(text):
    return [dict(item.split("=", 1) for item in line.split()) for line in text.splitlines() if line]


def test_check_member_writes_certificate(form_file, tmp_path, capsys):
    p = (x * x + x * y) ** 2
    out = tmp_path / "cert.txt"
    assert main(["check", form_file(p), "--k", "2", "--out", str(out)]) == 0
    cert = parse_certificate(out.read_text())
    assert certificate_holds(cert, p, 2)
    assert "status: member" in capsys.readouterr().out


def test_check_non_member_writes_witness(form_file, tmp_path):
    p = (x * x + x * y) ** 2
    out = tmp_path / "w.txt"
    assert main(["check", form_file(p), "--k", "1", "--out", str(out)]) == 1
    assert witness_holds(parse_witness(out.read_text()), p, 1)


def test_check_motzkin(form_file):
    assert main(["check", form_file(motzkin()), "--k", "10"]) == 1


def test_check_undecided(form_file, capsys):
    assert main(["--json-lines", "check", form_file(motzkin()), "--k", "10", "--max-iters", "5"]) == 2
    (rec,) = records(capsys.readouterr().out)
    assert rec["status"] == "undecided" and rec["k"] == "10" and rec["artifact"] == "-"
    assert "residual_primal" in rec


def test_check_json_lines_after_subcommand(form_file, tmp_path, capsys):
    out = tmp_path / "cert.txt"
    assert main(["check", form_file(hurwitz((2, 1, 1))), "--k", "2", "--out", str(out), "--json-lines"]) == 0
    (rec,) = records(capsys.readouterr().out)
    assert rec["status"] == "member" and rec["artifact"] == str(out)


def test_exit_codes_for_bad_input(form_file, tmp_path, capsys):
    p = form_file(x**4)
    assert main(["check", p, "--k", "0"]) == 11
    assert main(["check", str(tmp_path / "missing"), "--k", "1"]) == 10
    bad = tmp_path / "bad.form"
    bad.write_text("form n=2 d=4\n1 4\n")
    assert main(["check", str(bad), "--k", "1"]) == 10
    assert main(["check", p, "--k", "1", "--cap", "0"]) == 10
    assert main(["check", form_file(x**3, "odd.form"), "--k", "1"]) == 10
    with pytest.raises(SystemExit) as exc:
        main(["check", p])
    assert exc.value.code == 10
    capsys.readouterr()


def test_subset_explosion_exit(form_file):
    assert main(["check", form_file(motzkin()), "--k", "2", "--cap", "5"]) == 12
    assert main(["dual-check", form_file(motzkin()), "--k", "5", "--cap", "5"]) == 12
    assert main(["dual-check", form_file(motzkin()), "--k", "2", "--cap", "5", "--force"]) in (0, 1)


def test_dual_check(form_file, capsys):
    p1, p2 = form_file(dual_example(1), "p1"), form_file(dual_example(2), "p2")
    assert main(["dual-check", p1, "--k", "1"]) == 0
    assert main(["dual-check", p1, "--k", "2"]) == 1
    assert "violating support: (2,0) (1,1)" in capsys.readouterr().out
    assert main(["--json-lines", "dual-check", p2, "--k", "3"]) == 1
    (rec,) = records(capsys.readouterr().out)
    assert rec["status"] == "not_member" and rec["support"] == "(2,0);(1,1);(0,2)"


def test_gram_and_pair(form_file, capsys):
    assert main(["gram", form_file(dual_example(2))]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[1:] == ["4", "-2", "1"]
    assert main(["pair", form_file(dual_example(1)), form_file(x * x + x * y, "h")]) == 0
    assert "-1" in capsys.readouterr().out


def test_construct(tmp_path, capsys):
    assert main(["construct", "separator", "--d", "4", "--k", "3"]) == 0
    assert parse_form(capsys.readouterr().out) == binary_separator(4, 3)
    out = tmp_path / "h.form"
    assert main(["construct", "hurwitz", "--a", "2,1,1", "--out", str(out)]) == 0
    assert parse_form(out.read_text()) == hurwitz((2, 1, 1))
    assert capsys.readouterr().out.startswith("wrote ")
    assert main(["construct", "motzkin"]) == 0
    assert parse_form(capsys.readouterr().out) == motzkin()
    assert main(["construct", "hurwitz", "--a", "1,2"]) == 10
    assert main(["construct", "separator", "--d", "3", "--k", "9"]) == 11
    assert main(["construct", "extremal", "--r", "1", "--s", "1", "--t", "2"]) == 10


@pytest.mark.parametrize(
    "argv",
    [
        ["agiform", "--lambdas", "1/2,1/2", "--alphas", "4,0;0,4"],
        ["trinomial", "--n", "3", "--d", "3"],
        ["perturbed-fermat", "--n", "3", "--d", "3", "--extra", "1,1,1", "--eps", "1/100"],
        ["dual-example", "--which", "2"],
        ["extremal", "--r", "2", "--s", "2", "--t", "1", "--eps2", "-1"],
    ],
)
def test_construct_families(argv, capsys):
    assert main(["construct", *argv]) == 0
    parse_form(capsys.readouterr().out)


def test_construct_from_files(form_file, capsys):
    g = form_file(x * (x + y), "g")
    assert main(["construct", "thicken", "--g", g, "--lam", "1"]) == 0
    assert parse_form(capsys.readouterr().out) == 2 * x**4 + 2 * x**3 * y + x**2 * y**2
    assert main(["construct", "polya-lift", "--p", g, "--r", "1"]) == 0
    assert parse_form(capsys.readouterr().out) == (x * x + y * y) * x * (x + y)


def test_verify_paper_subset(capsys):
    assert main(["verify-paper", "--only", "duals,extremal"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "2/2 items passed" in out
    assert main(["verify-paper", "--only", "nope"]) == 10


def test_module_entry_point(form_file):
    done = subprocess.run(
        [sys.executable, "-m", "soskit", "--json-lines", "dual-check", form_file(dual_example(1)), "--k", "2"],
        capture_output=True,
        text=True,
    )
    assert done.returncode == 1
    assert "status=not_member" in done.stdout
