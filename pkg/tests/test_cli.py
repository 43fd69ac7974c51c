import json

import numpy as np
import pytest

from rnmlab.cli import (ConfigError, build_potential, cfg_get, parse_config,
                        run)


def write_config(tmp_path, text):
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return path


def test_parse_config_roundtrip(tmp_path):
    path = write_config(tmp_path, """
# comment line
potential.family = ginibre
tau = 1.0
n = 8
sampler.kind = matrix   # trailing comment
n_list = 8, 16
flag = true
""")
    cfg = parse_config(path)
    assert cfg_get(cfg, "potential.family") == "ginibre"
    assert cfg_get(cfg, "tau") == 1.0
    assert cfg_get(cfg, "n") == 8
    assert cfg_get(cfg, "n_list") == [8, 16]
    assert cfg_get(cfg, "flag") is True
    assert cfg_get(cfg, "missing", 7) == 7
    with pytest.raises(ConfigError):
        cfg_get(cfg, "missing", required=True)


def test_parse_config_rejects_garbage(tmp_path):
    path = write_config(tmp_path, "just some words\n")
    with pytest.raises(ConfigError):
        parse_config(path)


def test_build_potential_families(tmp_path):
    assert build_potential({"potential.family": "ginibre"}).name == "ginibre"
    assert build_potential({"potential.family": "power",
                            "potential.p": "2"}).name == "power2"
    r = np.linspace(0.05, 6.0, 400)
    table = np.column_stack([r, r**2, 2 * r, np.full_like(r, 2.0)])
    prof = tmp_path / "profile.csv"
    header = "r,q,dq,d2q"
    np.savetxt(prof, table, delimiter=",", header=header, comments="")
    pot = build_potential({"potential.family": "custom",
                           "potential.profile_file": str(prof)})
    assert pot.evaluate(1.0 + 0.0j) == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(ConfigError):
        build_potential({"potential.family": "hyperbolic"})


def test_identities_subcommand(tmp_path):
    out = tmp_path / "out"
    assert run(["identities", "--out", str(out)]) == 0
    summary = json.loads((out / "identities_summary.json").read_text())
    assert summary["pass"] is True
    assert summary["schema_version"] == 1
    table = (out / "identities.csv").read_text().splitlines()
    assert table[0] == "k,zero_sum,quadratic_sum,status"
    assert len(table) == 10  # header + k = 2..10
    assert all(row.endswith("exact pass") for row in table[1:])


def test_sample_rejects_n_zero(tmp_path, capsys):
    cfg = write_config(tmp_path, "n = 0\nseed = 1\n")
    code = run(["sample", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "n must be >= 1" in capsys.readouterr().err


def test_sample_requires_seed(tmp_path):
    cfg = write_config(tmp_path, "n = 4\n")
    assert run(["sample", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_unknown_subcommand_exits_2(tmp_path, capsys):
    assert run(["transmogrify"]) == 2


def test_sample_csv_output(tmp_path):
    cfg = write_config(tmp_path, "n = 4\nsamples = 3\nsampler.kind = matrix\n")
    out = tmp_path / "out"
    assert run(["sample", "--config", str(cfg), "--seed", "9",
                "--out", str(out)]) == 0
    rows = (out / "configurations.csv").read_text().splitlines()
    assert rows[0] == "sample_id,point_id,re,im"
    assert len(rows) == 1 + 3 * 4
    meta = json.loads((out / "sample_metadata.json").read_text())
    assert meta["seed"] == 9
    assert meta["sampler"] == "matrix"
    assert meta["n"] == 4


def test_sample_jsonl_output(tmp_path):
    cfg = write_config(tmp_path,
                       "n = 3\nsamples = 2\noutput.format = jsonl\nseed = 4\n")
    out = tmp_path / "out"
    assert run(["sample", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "configurations.jsonl").read_text().splitlines()
    assert len(lines) == 2
    rec = json.loads(lines[0])
    assert len(rec["re"]) == 3


def test_clt_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path, """
n = 16
samples = 60
sampler.kind = matrix
test_function.radius = 0.5
seed = 31
""")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        run(["clt", "--config", str(cfg), "--out", str(out)])
        outs.append((out / "clt_summary.json").read_bytes()
                    + (out / "fluct_values.csv").read_bytes())
    assert outs[0] == outs[1]


def test_clt_chains_deterministic_with_threads(tmp_path):
    cfg = write_config(tmp_path, """
n = 8
samples = 40
chains = 4
sampler.kind = matrix
seed = 5
""")
    blobs = []
    for threads, name in [(1, "serial"), (4, "pooled")]:
        out = tmp_path / name
        run(["clt", "--config", str(cfg), "--out", str(out),
             "--threads", str(threads)])
        blobs.append((out / "fluct_values.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_scaling_subcommand(tmp_path):
    cfg = write_config(tmp_path, "n = 128\n")
    out = tmp_path / "out"
    assert run(["scaling", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "scaling_summary.json").read_text())
    assert summary["pass"] is True
    prof = (out / "conditioned_profile.csv").read_text().splitlines()
    assert prof[0] == "distance,value,prediction"


def test_kernel_subcommand_with_gnuplot(tmp_path):
    cfg = write_config(tmp_path, "n = 32\n")
    out = tmp_path / "out"
    assert run(["kernel", "--config", str(cfg), "--out", str(out),
                "--gnuplot"]) == 0
    assert (out / "kernel_diagonal.csv").read_text().splitlines()[0] == \
        "z_re,z_im,R1,predicted,residual"
    assert (out / "kernel.gp").exists()


def test_cumulants_subcommand(tmp_path):
    cfg = write_config(tmp_path, "n_list = 16, 32\ncumulants.k_max = 3\n")
    out = tmp_path / "out"
    code = run(["cumulants", "--config", str(cfg), "--out", str(out)])
    rows = (out / "cumulants.csv").read_text().splitlines()
    assert rows[0] == "n,k,C_k,prediction"
    assert len(rows) == 1 + 2 * 3
    # at n = 32 the asymptotic variance check is out of reach: exit code 1
    assert code == 1
    summary = json.loads((out / "cumulants_summary.json").read_text())
    assert summary["pass"] is False


def test_boundary_subcommand(tmp_path):
    cfg = write_config(tmp_path, "n = 64\nsamples = 400\nseed = 11\n")
    out = tmp_path / "out"
    assert run(["boundary", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "boundary_summary.json").read_text())
    assert summary["pass"] is True
    assert summary["prediction"]["v_f2"] == pytest.approx(0.5, abs=1e-9)
    rows = (out / "boundary_fluct.csv").read_text().splitlines()
    assert rows[0] == "sample_id,fluct"
    assert len(rows) == 401


def test_berezin_subcommand(tmp_path):
    cfg = write_config(tmp_path, "n = 24\nberezin.transform_anchor = 0.05\n")
    out = tmp_path / "out"
    code = run(["berezin", "--config", str(cfg), "--out", str(out)])
    summary = json.loads((out / "berezin_summary.json").read_text())
    names = {c["name"] for c in summary["checks"]}
    assert any(name.startswith("berezin_mass") for name in names)
    assert "pinned_identity_residual" in names
