"""Config parsing, experiment runners, CLI contract, output determinism."""

import json
from pathlib import Path

import pytest

from tikhtorus import ConfigError, load_config
from tikhtorus.cli import main
from tikhtorus.experiments import run_experiment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def small_config_text(experiment="deblur", out_dir="out", **overrides):
    values = {
        "deltas": "1e-2,1e-3,1e-4",
        "s1_list": "-1.5,1.0",
        "seeds": "0,1,2",
        "bandlimit": "32",
        "reference": "256",
        "probe_bandlimits": "64,128,256",
    }
    values.update(overrides)
    return f"""
[experiment]
name = {experiment}

[operator]
kind = deblur_1d

[truth]
kind = hat

[schedule]
alpha0 = 1.0
kappa = 2.5
r = 1.0

[noise]
noise_regularity = -0.6
seeds = {values["seeds"]}

[grids]
delta_grid = {values["deltas"]}
s1_list = {values["s1_list"]}

[resolution]
bandlimit = {values["bandlimit"]}
reference_bandlimit = {values["reference"]}
plot_points = 128

[noise_probe]
s_values = -2.0,0.0
bandlimits = {values["probe_bandlimits"]}

[gamma]
test_function_count = 3

[output]
dir = {out_dir}
"""


def write_config(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestConfig:
    def test_shipped_configs_parse(self):
        for name in ("deblur", "rates", "noise_probe", "gamma"):
            config = load_config(CONFIG_DIR / f"{name}.ini")
            assert config.experiment == name

    def test_load_and_overrides(self, tmp_path):
        path = write_config(tmp_path, small_config_text(out_dir=str(tmp_path / "a")))
        config = load_config(path)
        assert config.seeds == (0, 1, 2)
        shifted = config.with_overrides(output_dir=str(tmp_path / "b"), seed_offset=100)
        assert shifted.seeds == (100, 101, 102)
        assert shifted.output_dir == str(tmp_path / "b")

    def test_metadata_covers_all_sections(self, tmp_path):
        path = write_config(tmp_path, small_config_text())
        meta = load_config(path).to_metadata()
        for section in (
            "experiment", "operator", "truth", "schedule", "noise",
            "grids", "resolution", "noise_probe", "gamma", "output",
        ):
            assert section in meta

    @pytest.mark.parametrize(
        "mutation,needle",
        [
            (("name = deblur", "name = nonsense"), "experiment name"),
            (("kind = deblur_1d", "kind = mystery"), "operator kind"),
            (("delta_grid = 1e-2,1e-3,1e-4", "delta_grid = 1e-3,1e-2"), "decreasing"),
            (("delta_grid = 1e-2,1e-3,1e-4", "delta_grid = -1e-2,-2e-2"), "positive"),
            (("reference_bandlimit = 256", "reference_bandlimit = 64"), "4 * bandlimit"),
            (("alpha0 = 1.0", "alpha0 = -1.0"), "alpha0"),
            (("seeds = 0,1,2", "seeds = "), "seeds"),
        ],
    )
    def test_named_field_errors(self, tmp_path, mutation, needle):
        text = small_config_text().replace(*mutation)
        path = write_config(tmp_path, text)
        with pytest.raises(ConfigError, match=needle.replace("*", r"\*")):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        text = small_config_text() + "\n[schedule]\nturbo = yes\n"
        # configparser rejects the duplicate section first; write a fresh one
        text = small_config_text().replace("alpha0 = 1.0", "alpha0 = 1.0\nturbo = yes")
        path = write_config(tmp_path, text)
        with pytest.raises(ConfigError, match="turbo"):
            load_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = write_config(tmp_path, small_config_text() + "\n[extras]\nx = 1\n")
        with pytest.raises(ConfigError, match="extras"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.ini")

    def test_missing_required_key(self, tmp_path):
        text = small_config_text().replace("dir = out", "")
        path = write_config(tmp_path, text)
        with pytest.raises(ConfigError, match=r"\[output\] dir"):
            load_config(path)


EXPECTED_FILES = {
    "deblur": {
        "errors.csv", "signal.csv", "divergence.csv",
        "errors.svg", "signal.svg", "metadata.json",
    },
    "rates": {"errors.csv", "slopes.csv", "errors.svg", "metadata.json"},
    "noise_probe": {"probe.csv", "probe.svg", "metadata.json"},
    "gamma": {"gamma.csv", "gamma.svg", "metadata.json"},
}

CSV_HEADERS = {
    ("deblur", "errors.csv"): "s1,delta,seed,raw_error,normalized_error",
    ("deblur", "divergence.csv"): "delta,seed,band_size,lower_bound,h1_norm_sq",
    ("rates", "slopes.csv"): "s1,regime,predicted_exponent,fitted_slope,residual",
    ("noise_probe", "probe.csv"): "s,bandlimit,seed_or_expected,partial_energy,growth_ratio,classification",
    ("gamma", "gamma.csv"): "n,k,alpha,test_function_id,pairing_gap,functional_gap,c_k",
}


class TestRunners:
    @pytest.mark.parametrize("experiment", sorted(EXPECTED_FILES))
    def test_outputs_and_headers(self, tmp_path, experiment):
        out = tmp_path / "out"
        path = write_config(tmp_path, small_config_text(experiment, str(out)))
        written = run_experiment(load_config(path))
        assert set(written) == EXPECTED_FILES[experiment]
        for name, file_path in written.items():
            assert file_path.exists()
            assert file_path.stat().st_size > 0
        for (exp, name), header in CSV_HEADERS.items():
            if exp == experiment:
                first_line = (out / name).read_text().splitlines()[0]
                assert first_line == header

    def test_metadata_is_json_with_parameters(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, small_config_text("rates", str(out)))
        run_experiment(load_config(path))
        payload = json.loads((out / "metadata.json").read_text())
        assert payload["parameters"]["schedule"]["kappa"] == 2.5
        assert "derived" in payload and "alpha_by_delta" in payload["derived"]
        assert "package_version" in payload

    def test_runs_are_byte_identical(self, tmp_path):
        out = tmp_path / "a"
        path = write_config(tmp_path, small_config_text("deblur", str(out)))
        first = run_experiment(load_config(path))
        snapshots = {name: file_path.read_bytes() for name, file_path in first.items()}
        second = run_experiment(load_config(path))
        for name in first:
            assert second[name].read_bytes() == snapshots[name]

    def test_svg_is_self_contained(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, small_config_text("deblur", str(out)))
        run_experiment(load_config(path))
        for svg in out.glob("*.svg"):
            text = svg.read_text()
            assert text.startswith("<svg")
            assert "href" not in text  # no external references
            assert "<image" not in text

    def test_gamma_sizes_reach_reference(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, small_config_text("gamma", str(out)))
        config = load_config(path)
        run_experiment(config)
        rows = (out / "gamma.csv").read_text().splitlines()[1:]
        ns = sorted({int(row.split(",")[0]) for row in rows})
        assert ns[-1] == 2 * config.reference_bandlimit + 1

    def test_divergence_rows_respect_lower_bound(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, small_config_text("deblur", str(out)))
        run_experiment(load_config(path))
        rows = (out / "divergence.csv").read_text().splitlines()[1:]
        assert rows
        for row in rows:
            _, _, band_size, lower_bound, h1_norm_sq = row.split(",")
            assert int(band_size) > 0
            assert float(h1_norm_sq) >= float(lower_bound) > 0
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["derived"]["divergence"]["emitted"] is True
        assert meta["derived"]["divergence"]["certificate_kappa"] == 2.0

    def test_divergence_skipped_without_h1_penalty(self, tmp_path):
        out = tmp_path / "out"
        text = small_config_text("deblur", str(out)).replace("r = 1.0", "r = 2.0")
        run_experiment(load_config(write_config(tmp_path, text)))
        assert not (out / "divergence.csv").exists()
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["derived"]["divergence"]["emitted"] is False

    def test_rates_slopes_beat_predictions(self, tmp_path):
        # contract of the rates run: every in-range s1 has
        # fitted_slope >= predicted_exponent - 0.15 for the noise-free sweep
        out = tmp_path / "out"
        text = small_config_text(
            "rates", str(out), deltas="1e-1,1e-2,1e-3,1e-4", s1_list="-3.0,-1.5",
            bandlimit="512", reference="4096",
        )
        run_experiment(load_config(write_config(tmp_path, text)))
        rows = (out / "slopes.csv").read_text().splitlines()[1:]
        assert rows
        for row in rows:
            _, regime, predicted, fitted, _ = row.split(",")
            if regime in ("case_i", "case_ii"):
                assert float(fitted) >= float(predicted) - 0.15

    def test_coefficient_truth_kind(self, tmp_path):
        signal = tmp_path / "signal.csv"
        signal.write_text("0,1.0,0\n1,0.25,-0.25\n")
        text = small_config_text("rates", str(tmp_path / "out")).replace(
            "kind = hat", f"kind = coefficients\npath = {signal}"
        )
        path = write_config(tmp_path, text)
        run_experiment(load_config(path))
        assert (tmp_path / "out" / "slopes.csv").exists()


class TestCli:
    def test_success_and_stdout(self, tmp_path, capsys):
        out = tmp_path / "out"
        path = write_config(tmp_path, small_config_text("rates", str(out)))
        code = main(["rates", "--config", str(path)])
        assert code == 0
        printed = capsys.readouterr().out.splitlines()
        assert str(out / "slopes.csv") in printed

    def test_out_override_and_seed_offset(self, tmp_path):
        path = write_config(tmp_path, small_config_text("noise_probe", str(tmp_path / "ignored")))
        out = tmp_path / "probe_out"
        code = main(["noise-probe", "--config", str(path), "--out", str(out), "--seed-offset", "50"])
        assert code == 0
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["parameters"]["noise"]["seeds"] == [50, 51, 52]

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, small_config_text().replace("name = deblur", "name = bogus"))
        code = main(["deblur", "--config", str(path)])
        assert code == 2
        assert "ConfigError" in capsys.readouterr().err

    def test_subcommand_config_mismatch(self, tmp_path, capsys):
        path = write_config(tmp_path, small_config_text("rates", str(tmp_path / "out")))
        code = main(["deblur", "--config", str(path)])
        assert code == 2
        assert "ConfigError" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["deblur", "--config", str(tmp_path / "absent.ini")])
        assert code == 2

    def test_unwritable_output_dir(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory")
        path = write_config(tmp_path, small_config_text("rates", str(blocker / "out")))
        code = main(["rates", "--config", str(path)])
        assert code == 3
        err = capsys.readouterr().err
        assert "Error" in err
