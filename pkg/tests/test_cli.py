
import pytest

from snpc import corpus
from snpc.cli import main


@pytest.fixture
def mult(tmp_path):
    f = tmp_path / "multiply.snp"
    f.write_text(corpus.source("multiply"))
    return f


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_and_check(capsys, mult):
    code, out, _ = run(capsys, "parse", mult)
    assert code == 0 and "V=" in out
    code, out, _ = run(capsys, "check", mult)
    assert code == 0 and out.strip() == "ok"


def test_check_reports_errors(capsys, tmp_path):
    f = tmp_path / "bad.snp"
    f.write_text("input n\nint x = 0\nx = y\nreturn x\n")
    code, out, _ = run(capsys, "check", f)
    assert code != 0


def test_run(capsys, mult):
    code, out, _ = run(capsys, "run", mult, "--input", "3,4")
    assert code == 0 and out.strip().splitlines()[-1] == "12"


def test_compile_decode_encode(capsys, mult, tmp_path):
    net = tmp_path / "m.nnsym"
    code, _, err = run(capsys, "compile", mult, "--N", 4, "-o", net)
    assert code == 0 and "max_width" in err
    code, out, _ = run(capsys, "decode", net)
    assert code == 0 and out.startswith("inputs=I,I")
    code, out, _ = run(capsys, "encode", net, "--unicode")
    assert code == 0 and "𝓘" in out
    code, out, _ = run(capsys, "encode", mult, "--N", 4, "--compressed")
    assert code == 0 and out.strip() == net.read_text().strip()


def test_verify_and_desclen(capsys, mult):
    code, out, _ = run(capsys, "verify", mult, "--N", 5)
    assert code == 0 and out.strip() == "checked=25 mismatches=0"
    code, out, _ = run(capsys, "verify", mult, "--N", 5, "--B", 5, "--write-back-bound", 5)
    assert code == 1
    code, out, _ = run(capsys, "desclen", mult, "--N", 4)
    assert code == 0 and "compressed_length=" in out


def test_bound(capsys, mult):
    code, out, _ = run(capsys, "bound", mult, "--N", 4)
    assert code == 0 and out.startswith("N=4 B=")


def test_corrupt_and_augment(capsys, mult, tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("".join(f"{x},{x % 2}\n" for x in range(1, 11)))
    out_csv = tmp_path / "n.csv"
    code, _, err = run(capsys, "corrupt", data, "--rho", "0.2", "--mode", "value-flip", "-o", out_csv)
    assert code == 0 and "corrupted 2 of 10" in err
    net = tmp_path / "m.nnsym"
    run(capsys, "compile", mult, "--N", 4, "-o", net)
    E = tmp_path / "e.csv"
    E.write_text("2,3,0\n")
    g = tmp_path / "g.nnsym"
    code, _, err = run(capsys, "augment", net, "--corrections", E, "-o", g)
    assert code == 0 and "depth=" in err


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--kind", "sample-size", "--L", 1, "--V", 1, "--B", 2,
                       "--eps", "1/2", "--delta", "0.36787944117144233")
    assert code == 0 and "sample_size" in out
    code, out, _ = run(capsys, "bounds", "--kind", "tail", "--n", 10, "--rho", "1/10", "--eps", "1/10")
    assert code == 0 and "exact_cdf" in out
    code, out, _ = run(capsys, "bounds", "--kind", "noisy", "--n", 1000, "--rho", "1/100", "--N", 10)
    assert code == 0 and "eps_star" in out


def test_experiment(capsys, tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("generator = prime_corrected\nN = 10\nn = 4 8\ntrials = 2\n")
    csv = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "experiment", cfg, "--csv", csv)
    assert code == 0 and "mean_err" in out
    assert len(csv.read_text().splitlines()) == 5


def test_errors_return_two(capsys, tmp_path):
    code, _, err = run(capsys, "parse", tmp_path / "missing.snp")
    assert code == 2 and err
