"""Flat key-value configuration files.

Format: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines ignored.  List values are comma separated.  Used for simulation
configs, dataset metadata sidecars, and Monte Carlo grid specs.
"""

from __future__ import annotations

from .dgp import SIGNAL_PRESETS, DgpConfig
from .errors import ConfigFieldError
from .harness import ExperimentGrid
from .pipeline import PipelineConfig
from .stationarity import IcSettings


def parse_kv_file(path) -> dict[str, str]:
    """Read a key-value file into a dict of raw strings."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigFieldError(
                    f"line {lineno}", f"expected 'key = value', got {raw.rstrip()!r}"
                )
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _take(kv: dict[str, str], key: str, conv, default=None, required: bool = False):
    if key not in kv:
        if required:
            raise ConfigFieldError(key, "missing required key")
        return default
    raw = kv.pop(key)
    try:
        return conv(raw)
    except ConfigFieldError:
        raise
    except Exception:
        raise ConfigFieldError(key, f"cannot parse value {raw!r}") from None


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(v) for v in raw.split(",") if v.strip() != "")


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(v) for v in raw.split(",") if v.strip() != "")


def _reject_unknown(kv: dict[str, str]) -> None:
    if kv:
        key = sorted(kv)[0]
        raise ConfigFieldError(key, "unknown key")


def load_dgp_config(path) -> DgpConfig:
    """DgpConfig from a key-value file.

    Either ``signal = strong|weak`` or an explicit ``beta_active`` list
    must be present; ``s`` is implied by the coefficient vector.
    """
    kv = parse_kv_file(path)
    signal = _take(kv, "signal", str)
    beta_active = _take(kv, "beta_active", _float_list)
    if signal is not None:
        if signal not in SIGNAL_PRESETS:
            raise ConfigFieldError("signal", f"unknown preset {signal!r}")
        if beta_active is not None:
            raise ConfigFieldError("beta_active", "must be omitted when signal is set")
        beta_active = SIGNAL_PRESETS[signal]
    elif beta_active is None:
        raise ConfigFieldError("beta_active", "missing (or set signal = strong|weak)")

    p = _take(kv, "p", int, required=True)
    sigma2_e = _take(kv, "sigma2_e", float, default=4.0)
    corr_decay = _take(kv, "corr_decay", float, default=0.5)
    tau = _take(kv, "tau", float)
    if tau is None:
        from .dgp import default_tau

        tau = default_tau(p, sigma2_e, corr_decay)

    config = DgpConfig(
        n=_take(kv, "n", int, required=True),
        p=p,
        s=len(beta_active),
        beta0=_take(kv, "beta0", float, default=1.0),
        beta_active=beta_active,
        rho=_take(kv, "rho", float, required=True),
        sigma2_e=sigma2_e,
        corr_decay=corr_decay,
        tau=tau,
        seed=_take(kv, "seed", int, default=0),
    )
    kv.pop("s", None)  # redundant with beta_active; tolerated for round-trips
    _reject_unknown(kv)
    return config


def pipeline_from_options(
    gamma: float | None = None,
    grid_scale: float | None = None,
    residual_mode: str | None = None,
    kmax: int | None = None,
    penalty: str | None = None,
) -> PipelineConfig:
    """PipelineConfig from the common CLI overrides.

    ``grid_scale`` multiplies the default per-n grid scale; the grid itself
    is still built per dataset at detection time.
    """
    from .adalasso import DEFAULT_GRID_EXPONENTS, DEFAULT_GRID_SIZE, LambdaGrid
    import numpy as np

    base = PipelineConfig()
    kwargs = {}
    if gamma is not None:
        kwargs["gamma"] = gamma
    if residual_mode is not None:
        kwargs["residual_mode"] = residual_mode.replace("-", "_")
    if kmax is not None or penalty is not None:
        rule = "log-n" if penalty in (None, "bic") else penalty
        kwargs["ic_settings"] = IcSettings(k_max=kmax, penalty_rule=rule)
    if grid_scale is not None:
        lo, hi = DEFAULT_GRID_EXPONENTS
        kwargs["grid"] = LambdaGrid(
            values=tuple(np.logspace(lo, hi, DEFAULT_GRID_SIZE)), scale=grid_scale
        )
    from dataclasses import replace

    return replace(base, **kwargs)


def load_experiment_grid(path, pipeline: PipelineConfig | None = None) -> ExperimentGrid:
    """ExperimentGrid from a key-value file.

    Recognized keys: n_values, p_values, rho_values, gamma_values,
    signal (strong|weak|custom), beta_active (custom only), replications,
    base_seed, tau, sigma2_e, corr_decay, beta0, and the detector overrides
    grid_scale, residual_mode, kmax, penalty.
    """
    kv = parse_kv_file(path)
    signal = _take(kv, "signal", str, default="strong")
    beta_active = _take(kv, "beta_active", _float_list)

    grid_scale = _take(kv, "grid_scale", float)
    residual_mode = _take(kv, "residual_mode", str)
    kmax = _take(kv, "kmax", int)
    penalty = _take(kv, "penalty", str)
    overrides = pipeline if pipeline is not None else pipeline_from_options(
        grid_scale=grid_scale, residual_mode=residual_mode, kmax=kmax, penalty=penalty
    )

    grid = ExperimentGrid(
        n_values=_take(kv, "n_values", _int_list, required=True),
        p_values=_take(kv, "p_values", _int_list, required=True),
        rho_values=_take(kv, "rho_values", _float_list, required=True),
        gamma_values=_take(kv, "gamma_values", _float_list, required=True),
        signal_preset=signal,
        beta_active=beta_active,
        replications=_take(kv, "replications", int, default=1000),
        base_seed=_take(kv, "base_seed", int, default=0),
        tau=_take(kv, "tau", float),
        sigma2_e=_take(kv, "sigma2_e", float, default=4.0),
        corr_decay=_take(kv, "corr_decay", float, default=0.5),
        beta0=_take(kv, "beta0", float, default=1.0),
        pipeline=overrides,
    )
    _reject_unknown(kv)
    return grid
