import json
import os

import numpy as np

from dbarucp import cli
from dbarucp.gridfn import RadialProfile, closed_form


def test_version_and_help_exit_zero(capsys):
    assert cli.main(["--version"]) == 0
    assert cli.main(["--help"]) == 0


def test_parse_errors_exit_two():
    assert cli.main([]) == 2
    assert cli.main(["verify", "--suite", "nope"]) == 2
    assert cli.main(["hls", "--grid-n", "4"]) == 2
    assert cli.main(["hls", "--scale-v", "-1"]) == 2


def test_verify_identity_passes(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert cli.main(["verify", "--suite", "identity", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["overall"] == "pass" and d["suite"] == "identity"
    assert "PASS" in capsys.readouterr().out


def test_hls_rerun_is_byte_identical(tmp_path):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    args = ["hls", "--trials", "3", "--grid-n", "32", "--seed", "5"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert cli.main(args + ["--scale-v", "7", "--out", str(c)]) == 0
    ra = [t["ratio"] for t in json.loads(a.read_text())["trials"]]
    rc = [t["ratio"] for t in json.loads(c.read_text())["trials"]]
    assert np.allclose(ra, rc, rtol=1e-11)


def test_gallery_exact_l2_writes_files(tmp_path):
    out = tmp_path / "g"
    assert cli.main(["gallery", "--example", "exact-l2", "--grid-n", "32", "--out", str(out)]) == 0
    names = set(os.listdir(out))
    assert {"u_profile.csv", "V_profile.csv", "metadata.json", "flatness.png"} <= names
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["example"]["metadata"]["eps"] == 0.25
    RadialProfile.from_csv(out / "u_profile.csv")


def test_gallery_range_error_exits_two(tmp_path, capsys):
    rc = cli.main(["gallery", "--example", "subcritical", "--eps", "1.5", "--out", str(tmp_path / "s")])
    assert rc == 2 and "must be below 2" in capsys.readouterr().err


def test_gallery_custom_needs_csvs(tmp_path):
    assert cli.main(["gallery", "--example", "custom", "--out", str(tmp_path / "c")]) == 2


def test_gallery_custom_round_trip(tmp_path):
    u, V = closed_form("subcritical-u", 0.5), closed_form("subcritical-V", 0.5)
    RadialProfile.from_function(u.radial, 0.05, 1.0, 200).to_csv(tmp_path / "u.csv")
    RadialProfile.from_function(V.radial, 0.05, 1.0, 200).to_csv(tmp_path / "v.csv")
    out = tmp_path / "c"
    rc = cli.main(["gallery", "--example", "custom", "--u-csv", str(tmp_path / "u.csv"),
                   "--v-csv", str(tmp_path / "v.csv"), "--plot", "none", "--grid-n", "32", "--out", str(out)])
    assert rc == 0 and (out / "metadata.json").exists()


def test_gallery_inv_z_prints_both_values(tmp_path, capsys):
    assert cli.main(["gallery", "--example", "inv-z", "--plot", "none", "--out", str(tmp_path / "i")]) == 0
    text = capsys.readouterr().out
    assert "-pi i phi(0)" in text and "-pi phi(0)" in text
