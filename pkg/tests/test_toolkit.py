import pytest

from asymconv import toolkit as toolkit_module
from asymconv.common import SamplerConfig
from asymconv.experiment import Command, ExperimentConfig
from asymconv.toolkit import AsymConvToolkit

FAST = SamplerConfig(samples=128, seed=3, refine_iters=0)


@pytest.fixture
def runner(tmp_path) -> "AsymConvToolkit":
    return AsymConvToolkit({}, config_directory=str(tmp_path), out_dir=str(tmp_path / "out"))


def _envelope_at_corner() -> "ExperimentConfig":
    return ExperimentConfig(
        Command.Envelope,
        {"fn": "x^2+y^2", "window": [-2.0, 2.0], "grid": 41, "lp_grid": 9, "point": [2.0, 2.0]},
        FAST,
    )


def _moduli_with_narrow_fit() -> "ExperimentConfig":
    return ExperimentConfig(
        Command.Moduli,
        {"norm": "lp:2", "modulus": "delta", "grid": [0.2, 0.4, 0.6, 0.8, 1.0], "fit_window": [0.9, 1.0]},
        FAST,
    )


def test_slopes_are_skipped_on_the_window_border(runner) -> "None":
    outcome = runner.run_envelope(_envelope_at_corner())
    assert "slopes_x" not in outcome.results
    assert "values_at" in outcome.results


def test_unexpected_slope_errors_propagate(runner, monkeypatch) -> "None":
    def broken(*args, **kwargs):
        raise RuntimeError("broken slopes")

    monkeypatch.setattr(toolkit_module, "one_sided_slopes", broken)
    with pytest.raises(RuntimeError):
        runner.run_envelope(_envelope_at_corner())


def test_power_fit_is_skipped_on_a_narrow_window(runner) -> "None":
    outcome = runner.run_moduli(_moduli_with_narrow_fit())
    assert "fit" not in outcome.results
    assert len(outcome.curves) == 1


def test_unexpected_fit_errors_propagate(runner, monkeypatch) -> "None":
    def broken(*args, **kwargs):
        raise RuntimeError("broken fit")

    monkeypatch.setattr(toolkit_module, "power_fit", broken)
    with pytest.raises(RuntimeError):
        runner.run_moduli(_moduli_with_narrow_fit())
