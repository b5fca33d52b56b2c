import math

import numpy as np
import pytest

from upqi.errors import (
    FormatError,
    IncompleteGridError,
    OutOfRangeError,
    ParseError,
    UnknownKeyError,
    ValueOutOfRangeError,
)
from upqi.imaging import ObjectMap, scan_object
from upqi.io import (
    PGM_MAXVAL,
    Config,
    fmt,
    load_object,
    parse_config,
    pgm_to_phi,
    phi_to_pgm,
    read_pgm,
    t_to_pgm,
    write_object_csv,
    write_pgm,
    write_reconstruction,
)
from upqi.optics import make_setup

STD = "r1 = 0.5\nr2 = 0.5\nalpha = 1\nbeta = 1"


class TestConfig:
    def test_defaults(self):
        cfg = parse_config(STD)
        assert cfg == Config(r1=0.5, r2=0.5, alpha=1.0, beta=1.0)
        assert (cfg.phi_p1, cfg.phi_p2, cfg.phi_alpha, cfg.phi_beta) == (0, 0, 0, 0)
        assert cfg.samples is None and cfg.seed == 0 and cfg.protocol == "qsi"

    def test_full(self):
        text = STD + "\n# comment\nphi_p2 = 1.5  # trailing\nsamples = 1000\nseed = 0xff\nprotocol = qfi\n\n"
        cfg = parse_config(text)
        assert cfg.phi_p2 == 1.5
        assert (cfg.samples, cfg.seed, cfg.protocol) == (1000, 255, "qfi")
        assert cfg.setup().squeezer2.pump_phase == 1.5

    def test_exact_keyword(self):
        assert parse_config(STD + "\nsamples = exact").samples is None

    def test_unknown_key_reports_line(self):
        with pytest.raises(UnknownKeyError) as info:
            parse_config("r1 = 0.5\nr2 = 0.5\ngain = 3\nalpha = 1\nbeta = 1")
        assert info.value.line == 3
        assert "line 3" in str(info.value)

    def test_duplicate(self):
        with pytest.raises(ParseError) as info:
            parse_config(STD + "\nr1 = 0.7")
        assert info.value.line == 5

    @pytest.mark.parametrize(
        "extra, error",
        [
            ("r1 = abc", ParseError),
            ("r1 -0.5", ParseError),
            ("samples = 1", OutOfRangeError),
            ("samples = many", ParseError),
            ("seed = -1", OutOfRangeError),
            ("protocol = fast", OutOfRangeError),
            ("phi_alpha = nan", OutOfRangeError),
        ],
    )
    def test_bad_values(self, extra, error):
        with pytest.raises(error):
            parse_config("r2 = 0.5\nalpha = 1\nbeta = 1\n" + extra)

    def test_negative_gain(self):
        with pytest.raises(OutOfRangeError):
            parse_config(STD.replace("r1 = 0.5", "r1 = -0.5"))

    def test_missing_required(self):
        with pytest.raises(ParseError, match="beta"):
            parse_config("r1 = 0.5\nr2 = 0.5\nalpha = 1")


class TestObjectCSV:
    def test_two_by_two(self, tmp_path):
        p = tmp_path / "obj.csv"
        p.write_text("i,j,T,phi_T\n0,0,0,0\n0,1,1,0\n1,0,1,0.5\n1,1,0,-0.5\n")
        obj = load_object(p)
        np.testing.assert_array_equal(obj.T, [[0, 1], [1, 0]])
        np.testing.assert_array_equal(obj.phi_T, [[0, 0], [0.5, -0.5]])

    def test_duplicate(self, tmp_path):
        p = tmp_path / "obj.csv"
        p.write_text("i,j,T,phi_T\n0,0,0,0\n0,0,1,0\n")
        with pytest.raises(FormatError):
            load_object(p)

    def test_missing_pixel(self, tmp_path):
        p = tmp_path / "obj.csv"
        p.write_text("i,j,T,phi_T\n0,0,0,0\n1,1,1,0\n")
        with pytest.raises(IncompleteGridError):
            load_object(p)

    def test_out_of_range(self, tmp_path):
        p = tmp_path / "obj.csv"
        p.write_text("i,j,T,phi_T\n0,0,1.5,0\n")
        with pytest.raises(ValueOutOfRangeError):
            load_object(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "obj.csv"
        p.write_text("row,col,T,phi\n0,0,1,0\n")
        with pytest.raises(FormatError):
            load_object(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            load_object(tmp_path / "nope.csv")

    def test_write_read_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        obj = ObjectMap(rng.uniform(0, 1, (3, 5)), rng.uniform(-3, 3, (3, 5)))
        write_object_csv(tmp_path / "o.csv", obj)
        back = load_object(tmp_path / "o.csv")
        assert back.T.tobytes() == obj.T.tobytes()
        assert back.phi_T.tobytes() == obj.phi_T.tobytes()


class TestPGM:
    def test_t_endpoint(self, tmp_path):
        write_pgm(tmp_path / "m.T.pgm", np.array([[0, PGM_MAXVAL]]))
        write_pgm(tmp_path / "m.phi.pgm", np.array([[0, PGM_MAXVAL]]))
        obj = load_object(tmp_path / "m")
        assert obj.T[0, 0] == 0.0 and obj.T[0, 1] == 1.0
        assert obj.phi_T[0, 1] == pytest.approx(math.pi)

    def test_load_by_plane_name(self, tmp_path):
        write_pgm(tmp_path / "m.T.pgm", np.array([[100]]))
        write_pgm(tmp_path / "m.phi.pgm", np.array([[200]]))
        assert load_object(tmp_path / "m.phi.pgm").T[0, 0] == pytest.approx(100 / PGM_MAXVAL)

    def test_phase_quantization(self):
        phi = np.linspace(-math.pi + 1e-9, math.pi, 10001)
        back = pgm_to_phi(phi_to_pgm(phi))
        err = np.abs(np.vectorize(lambda a, b: math.remainder(a - b, 2 * math.pi))(back, phi))
        assert err.max() <= math.pi / PGM_MAXVAL

    def test_t_quantization(self):
        T = np.linspace(0, 1, 1001)
        assert np.abs(t_to_pgm(T) / PGM_MAXVAL - T).max() <= 0.5 / PGM_MAXVAL

    def test_round_trip_file(self, tmp_path):
        data = np.array([[0, 1, 2], [65535, 7, 9]])
        write_pgm(tmp_path / "x.pgm", data)
        np.testing.assert_array_equal(read_pgm(tmp_path / "x.pgm"), data)

    def test_rejects_other_maxval(self, tmp_path):
        (tmp_path / "x.pgm").write_text("P2\n1 1\n255\n3\n")
        with pytest.raises(FormatError):
            read_pgm(tmp_path / "x.pgm")

    def test_rejects_short_data(self, tmp_path):
        (tmp_path / "x.pgm").write_text("P2\n2 2\n65535\n1 2 3\n")
        with pytest.raises(IncompleteGridError):
            read_pgm(tmp_path / "x.pgm")

    def test_plane_shape_mismatch(self, tmp_path):
        write_pgm(tmp_path / "m.T.pgm", np.zeros((2, 2), dtype=int))
        write_pgm(tmp_path / "m.phi.pgm", np.zeros((1, 2), dtype=int))
        with pytest.raises(FormatError):
            load_object(tmp_path / "m")


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, math.pi, 2.9775451426674384, 1e-300):
        assert float(fmt(v)) == v
    assert fmt(0.1) == "0.10000000000000001"


def test_reconstruction_files_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    obj = ObjectMap(rng.uniform(0.05, 1, (4, 6)), rng.uniform(-3, 3, (4, 6)))
    recon, metrics = scan_object(make_setup(0.5, 0.5), obj, "qsi", None)
    files = write_reconstruction(tmp_path, recon, metrics, pgm=True)
    assert {f.name for f in files} == {"T_hat.csv", "phi_hat.csv", "metrics.txt", "T_hat.T.pgm", "T_hat.phi.pgm"}
    for f in files:
        assert f.read_text().endswith("\n")
    assert (tmp_path / "T_hat.csv").read_text().startswith("i,j,T,phi_T,flag\n")
    assert (tmp_path / "phi_hat.csv").read_text().startswith("i,j,phi_T,flag\n")
    again = load_object(tmp_path / "T_hat.csv")
    assert np.abs(again.T - obj.T).max() <= 1e-9
    assert np.abs(again.phi_T - obj.phi_T).max() <= 1e-9
    keys = [line.split("=")[0] for line in (tmp_path / "metrics.txt").read_text().splitlines()]
    assert keys == ["rmse_T", "rmse_phi", "max_abs_err_T", "n_pixels", "samples_per_setting"]
    assert "samples_per_setting=exact" in (tmp_path / "metrics.txt").read_text()
    rendered = load_object(tmp_path / "T_hat")
    assert np.abs(rendered.T - obj.T).max() <= 0.5 / PGM_MAXVAL + 1e-12
