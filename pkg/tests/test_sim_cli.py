import numpy as np
import pytest

from sogrand import codes
from sogrand.cli import main
from sogrand.sim import (CSV_COLUMNS, CalibrationBins, ConfigError, ExperimentConfig, PointStats,
                         bit_bin_edges, block_bin_edges, calibrate, decode_one, run_sim)

PRODUCT_CFG = """
# small product-code sweep
code = ebch
ebch_m = 3
ebch_t = 1
construction = product
snr_start = 1.0
snr_stop = 3.0
snr_step = 1.0
min_frame_errors = 20
max_frames = 400
seed = 11
"""


def write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_config_parsing():
    cfg = ExperimentConfig.from_text(PRODUCT_CFG + "parity_skip = no\nalpha = 0.4\n")
    assert cfg.ebch_m == 3 and cfg.construction == "product"
    assert cfg.snr_points == [1.0, 2.0, 3.0]
    assert cfg.parity_skip is False and cfg.alpha == 0.4
    assert cfg.turbo().alpha == 0.4
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("extra", ["colour = red\n", "alpha = -1\n", "max_frames = lots\n",
                                   "construction = staircase\n", "snr_stop = 0\n",
                                   "min_frame_errors = 0\n", "just words\n", "code = import\n"])
def test_config_errors(extra):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(PRODUCT_CFG + extra)


def test_run_sim_reproducible_and_consistent():
    cfg = ExperimentConfig.from_text(PRODUCT_CFG)
    a = run_sim(cfg).to_csv()
    b = run_sim(cfg).to_csv()
    assert a == b
    lines = a.strip().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    for p in run_sim(cfg).points:
        assert p.frames == cfg.max_frames or p.block_errors == cfg.min_frame_errors
        assert p.bler == p.block_errors / p.frames
        assert p.ber == p.bit_errors / (p.frames * 16)


def test_workers_give_identical_results():
    cfg = ExperimentConfig.from_text(PRODUCT_CFG)
    assert run_sim(cfg, workers=1).to_csv() == run_sim(cfg, workers=2, chunk=37).to_csv()


def test_bler_non_increasing_with_snr():
    cfg = ExperimentConfig.from_text(PRODUCT_CFG.replace("max_frames = 400", "max_frames = 3000")
                                     .replace("min_frame_errors = 20", "min_frame_errors = 100"))
    pts = run_sim(cfg).points
    for lo, hi in zip(pts, pts[1:]):
        # later point's interval must not sit above the earlier one
        assert hi.wilson_interval()[0] <= lo.wilson_interval()[1]


def test_wilson_interval():
    p = PointStats(0.0, frames=1000, block_errors=100, N=1, K=1)
    lo, hi = p.wilson_interval()
    assert lo < 0.1 < hi
    assert lo == pytest.approx(0.0829, abs=5e-4) and hi == pytest.approx(0.1202, abs=5e-4)


def test_gldpc_and_single_constructions():
    base = PRODUCT_CFG.replace("ebch_m = 3", "ebch_m = 4").replace("max_frames = 400", "max_frames = 30")
    for c in ("gldpc", "single"):
        cfg = ExperimentConfig.from_text(base.replace("construction = product", f"construction = {c}"))
        pts = run_sim(cfg).points
        assert all(p.frames > 0 for p in pts)


def test_rician_frame_size_check():
    bad = PRODUCT_CFG + "channel = rician\nrician_nc = 10\nrician_t = 4\n"
    with pytest.raises(ConfigError):
        run_sim(ExperimentConfig.from_text(bad))
    ok = PRODUCT_CFG + "channel = rician\nrician_nc = 8\nrician_t = 4\nmax_frames = 20\n"
    assert run_sim(ExperimentConfig.from_text(ok)).points[0].frames > 0


def test_synthetic_calibration_on_diagonal(rng):
    bins = CalibrationBins(block_bin_edges())
    for p in (3e-3, 0.02, 0.08, 0.3):
        pred = np.full(200000, p)
        bins.add(pred, rng.random(pred.size) < p)
    for lo, hi, pred, emp, count, events in bins.table():
        se = np.sqrt(pred * (1 - pred) / count)
        assert abs(emp - pred) < 4 * se
    assert len(bins.table()) == 4


def test_bin_edges():
    e = block_bin_edges()
    assert e[0] == 0.0 and e[-1] == 1.0
    assert np.allclose(e[1:3], [1e-6, 10**-5.5])
    assert len(bit_bin_edges()) == 21
    bins = CalibrationBins(bit_bin_edges())
    bins.add([0.0, 1.0, 0.5], [0, 1, 1])
    assert bins.count.sum() == 3


def test_calibrate_usage_errors():
    cfg = ExperimentConfig.from_text(PRODUCT_CFG)
    with pytest.raises(ConfigError):
        calibrate(cfg)
    single = ExperimentConfig.from_text(PRODUCT_CFG.replace("product", "single"))
    with pytest.raises(ConfigError):
        calibrate(single, "pyndiah", "block")
    with pytest.raises(ConfigError):
        calibrate(single, "chase")


@pytest.mark.parametrize("est,mode", [("sogrand", "block"), ("forney", "block"),
                                      ("sogrand", "bit"), ("forney", "bit"), ("pyndiah", "bit")])
def test_calibrate_runs(est, mode):
    single = ExperimentConfig.from_text(PRODUCT_CFG.replace("product", "single"))
    bins = calibrate(single, est, mode, frames=300)
    per_frame = 1 if mode == "block" else 8
    assert bins.count.sum() == 300 * per_frame


def test_cli_simulate(tmp_path, capsys):
    cfg = write(tmp_path, PRODUCT_CFG)
    out = tmp_path / "res.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    assert out.read_text() == run_sim(ExperimentConfig.from_file(cfg)).to_csv()


def test_cli_config_error(tmp_path, capsys):
    cfg = write(tmp_path, PRODUCT_CFG + "bogus = 1\n")
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_calibrate(tmp_path):
    cfg = write(tmp_path, PRODUCT_CFG.replace("product", "single"))
    out = tmp_path / "cal.csv"
    assert main(["calibrate", "--config", str(cfg), "--estimator", "sogrand", "--mode", "bit",
                 "--frames", "100", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "bin_lo,bin_hi,predicted,empirical,count,events"
    assert main(["calibrate", "--config", str(write(tmp_path, PRODUCT_CFG, "p.cfg"))]) == 2


def test_cli_codegen(tmp_path, capsys):
    assert main(["codegen", "--ebch", "4", "1", "--out-dir", str(tmp_path), "--stem", "e16"]) == 0
    g = codes.import_code(tmp_path / "e16.G.txt")
    h = codes.import_code(tmp_path / "e16.H.txt")
    assert g.n == 16 and (g.n, g.k) == (h.n, h.k)
    assert len((tmp_path / "e16.G.txt").read_text().splitlines()[1]) == 16
    assert main(["codegen", "--crc", "25", "15", "2b9", "--out-dir", str(tmp_path), "--stem", "crc"]) == 0
    assert len((tmp_path / "crc.H.txt").read_text().splitlines()) == 1 + 10
    assert main(["codegen", "--out-dir", str(tmp_path)]) == 2


def test_decode_one_reports():
    code = codes.build_ebch(4, 1)
    cw = codes.encode(code, np.arange(11) % 2)
    llr = 40.0 * (1 - 2.0 * cw)
    rep = decode_one(code, llr, target_L=1)
    assert "[0] q=1 " in rep and "decoded: " + "".join(map(str, cw)) in rep
    weak = llr.copy()
    weak[3] = -0.5 * np.sign(weak[3])
    rep = decode_one(code, weak, target_L=1)
    assert "decoded: " + "".join(map(str, cw)) in rep
    garbage = np.linspace(-1, 1, 16)
    rep = decode_one(code, garbage, target_L=4, budget=1)
    assert "abandoned: True" in rep and "list size: 0" in rep and "not_in_list: 1" in rep
    with pytest.raises(ConfigError):
        decode_one(code, np.zeros(15))


def test_cli_decode(tmp_path, capsys):
    code = codes.build_ebch(3, 1)
    cw = codes.encode(code, [1, 0, 1, 1])
    llr_file = tmp_path / "llr.txt"
    llr_file.write_text(" ".join(f"{v:g}" for v in 8.0 * (1 - 2.0 * cw)))
    assert main(["decode", "--ebch", "3", "1", "--llr", str(llr_file), "--list-size", "2"]) == 0
    out = capsys.readouterr().out
    assert "decoded: " + "".join(map(str, cw)) in out
    assert main(["decode", "--ebch", "4", "1", "--llr", str(llr_file)]) == 2
