import subprocess
import sys

import pytest

from stathyp.cli import group_from_config, main, parse_radii, UsageError
from stathyp.groups import parse_group


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spheres_to_stdout(capsys):
    code, out, _ = run(capsys, "spheres", "--group", "free(2)", "--n", "1..4")
    assert code == 0
    assert out.splitlines() == ["spec,n,count", "free(2),1,4", "free(2),2,12", "free(2),3,36",
                                "free(2),4,108"]


def test_growth(capsys):
    code, out, _ = run(capsys, "growth", "--group", "abelian(2)", "--n", "6")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "spec,n,count,nu_log,nu_ratio,sandwich"
    assert lines[-1].startswith("# nu_hat=")


def test_estimate_writes_csv_and_dat(tmp_path, capsys):
    out = tmp_path / "e.csv"
    code, _, err = run(capsys, "estimate", "--group", "free(2)", "--radii", "1,2,3",
                       "--out", str(out))
    assert code == 0 and "verdict" in err
    rows = out.read_text().splitlines()
    assert rows[2].startswith("free(2),2,exact,")
    assert (tmp_path / "e.dat").read_text().splitlines()[2] == f"2 {5 / 3!r}"


def test_missing_seed_is_a_usage_error(capsys):
    code, _, err = run(capsys, "estimate", "--group", "direct(free(2),cyclic(3))", "--radii", "30")
    assert code == 2 and "--seed" in err


def test_threads_give_identical_csv(tmp_path, capsys):
    paths = []
    for threads in ("1", "4"):
        p = tmp_path / f"t{threads}.csv"
        code, _, _ = run(capsys, "estimate", "--group", "free_product(abelian(2),free(1))",
                         "--radii", "3,4,25", "--samples", "5000", "--seed", "17",
                         "--threads", threads, "--out", str(p))
        assert code == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('n = "1..3"\n[group]\nfamily = "direct"\nleft = "free(2)"\n'
                   'right = { family = "cyclic", order = 3 }\n')
    code, out, _ = run(capsys, "spheres", "--config", str(cfg))
    assert code == 0 and out.splitlines()[1] == '"direct(free(2),cyclic(3))",1,6'
    code, out, _ = run(capsys, "spheres", "--config", str(cfg), "--group", "free(3)")
    assert out.splitlines()[1] == "free(3),1,6" and len(out.splitlines()) == 4


def test_diagnose(tmp_path, capsys):
    out = tmp_path / "d"
    code, _, _ = run(capsys, "diagnose", "--group", "free_product(abelian(2),free(1))", "--n", "8",
                     "--bigR", "1..3", "--poincare-n", "40", "--out", str(out))
    assert code == 0
    prof = (tmp_path / "d.profile.csv").read_text().splitlines()
    assert prof[0] == "spec,n,rho,R,i,count,ratio,theta,F_proxy,D_proxy,partition_ok"
    assert sum(1 for r in prof if ",sum," in r) == 3
    assert all(r.endswith(",1") for r in prof if ",sum," in r)
    poinc = (tmp_path / "d.poincare.csv").read_text().splitlines()
    assert poinc[0] == "spec,factor,s,N,count,A_N"
    assert sum(1 for r in poinc if ",tail," in r) == 2


@pytest.mark.parametrize("argv,code", [
    (["diagnose", "--group", "free_product(abelian(2),free(1))", "--n", "10", "--rho", "0.6"], 2),
    (["diagnose", "--group", "abelian(2)", "--n", "10"], 1),
    (["spheres", "--group", "free(2", "--n", "1"], 2),
    (["spheres", "--n", "1"], 2),
    (["estimate", "--group", "free(2)", "--radii", "3..1"], 2),
    (["spheres", "--group", "free(2)", "--n", "2", "--threads", "0"], 2),
])
def test_error_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_cache_subcommand(tmp_path, capsys):
    run(capsys, "spheres", "--group", "free(2)", "--n", "2,3", "--cache-dir", str(tmp_path))
    code, out, _ = run(capsys, "cache", "verify", str(tmp_path))
    assert code == 0 and out.count(": ok") == 2
    victim = tmp_path / "free_2.n3.sph"
    victim.write_bytes(victim.read_bytes()[:-1])
    code, out, _ = run(capsys, "cache", "inspect", str(tmp_path))
    assert code == 1 and "ChecksumError" in out


def test_helpers():
    assert parse_radii("1..3,8") == [1, 2, 3, 8]
    assert parse_radii(5) == [5]
    with pytest.raises(UsageError):
        parse_radii("a..b")
    assert group_from_config({"family": "free_product", "left": {"family": "abelian", "dim": 2},
                              "right": "free(1)"}) == parse_group("free_product(abelian(2),free(1))")
    assert group_from_config({"family": "dihedral_inf"}) == parse_group("dihedral_inf")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stathyp.cli", "spheres", "--group", "cyclic(4)",
                          "--n", "0..3"], capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[-1] == "cyclic(4),3,0"
