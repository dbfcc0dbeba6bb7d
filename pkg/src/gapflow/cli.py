"""gapflow command line: build gap series, test membership and run the
oscillation experiments from a YAML run config."""
import functools
import json
import math
import os
from typing import Any
from typing import Callable
from typing import Dict

import click
import pandas as pd

from gapflow import GapflowError
from gapflow import SCHEMA
from gapflow.config import CONFIG_FILE
from gapflow.config import load_config
from gapflow.config import RunConfig
from gapflow.evaluation import circle_profile
from gapflow.membership import coefficient_bound
from gapflow.membership import fast_criterion
from gapflow.membership import gamma_profile
from gapflow.membership import kww_witness
from gapflow.oscillation import ABS_AVERAGE_RTOL
from gapflow.oscillation import abs_average
from gapflow.oscillation import chain_moment_series
from gapflow.oscillation import lil_experiment
from gapflow.oscillation import lil_statistics
from gapflow.oscillation import moment_series
from gapflow.oscillation import trivial_bound_scan
from gapflow.utils import clean_for_json
from gapflow.utils import format_values
from gapflow.utils import get_logger
from gapflow.utils import with_header
from gapflow.weights import check_integral_lemma
from gapflow.weights import doubling_constant
from gapflow.weights import regularity_check

logger = get_logger(__name__)

LEMMA_SIZES = (10**2, 10**3, 10**4, 10**5, 10**6)


def print_title_info() -> None:
    """Prints the title info."""
    click.echo("gapflow: Hadamard gap series in growth spaces")


def handles_errors(command: Callable[..., None]) -> Callable[..., None]:
    """Turn gapflow errors into messages and their exit codes."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        try:
            command(*args, **kwargs)
        except GapflowError as e:
            logger.error(f"{command.__name__} failed: {e}")
            click.echo(f"error: {e}", err=True)
            raise SystemExit(e.exit_code)

    return wrapper


def show(df: pd.DataFrame, rows: int = 20) -> None:
    """Print the head of a report as a markdown table."""
    view = df.head(rows).copy()
    for col in view.columns:
        view[col] = view[col].apply(format_values)
    click.echo(view.to_markdown(index=False))


def emit(cfg: RunConfig, name: str, df: pd.DataFrame, payload: Dict[str, Any]) -> str:
    """Write a report as CSV (config hash in a comment line) or JSON (schema header)."""
    os.makedirs(cfg.output.out, exist_ok=True)
    path = os.path.join(cfg.output.out, f"{name}.{cfg.output.format}")
    with open(path, "w") as f:
        if cfg.output.format == "csv":
            f.write(f"# schema={SCHEMA} config_hash={cfg.config_hash}\n")
            df.to_csv(f, index=False)
        else:
            json.dump(clean_for_json(with_header(payload, SCHEMA, cfg.config_hash)), f, indent=2, sort_keys=True)
            f.write("\n")
    logger.info(f"wrote {path}")
    click.echo(f"wrote {path}")
    return path


@click.group()
@click.option("-c", "--config", "config_path", help="YAML run config", type=str, default=CONFIG_FILE)
@click.option("-o", "--out", help="output directory", type=str, default=None)
@click.option("-f", "--format", "fmt", help="output format", type=click.Choice(["csv", "json"]), default=None)
@click.option("-s", "--seed", help="seed for sampled phases and trials", type=int, default=None)
@click.pass_context
@handles_errors
def main(ctx: click.Context, config_path: str, out: str, fmt: str, seed: int) -> None:
    """Construct, evaluate and analyze Hadamard gap series."""
    ctx.obj = load_config(config_path).with_overrides(seed=seed, out=out, fmt=fmt)


@main.command()
@click.pass_obj
@handles_errors
def weight(cfg: RunConfig) -> None:
    """v/g samples, doubling certificate, regularity and integral ratios."""
    print_title_info()
    w = cfg.weight.build()
    eps = cfg.experiment.eps_grid
    df = pd.DataFrame(
        {
            "eps": eps,
            "v": [w.v_eps(e) for e in eps],
            "x": [1.0 / e for e in eps],
            "g": [w.g(1.0 / e) for e in eps],
        }
    )
    cert = doubling_constant(w)
    a_hat = regularity_check(w, 2.0, [2.0**k for k in range(0, 61)])
    lemma = {n: check_integral_lemma(w, n) for n in LEMMA_SIZES}
    show(df)
    click.echo(f"D_hat={cert.d_hat:.10g} D_g_hat={cert.d_g_hat:.10g} passed={cert.passed} A_hat(q=2)={a_hat:.6g}")
    for n, ratio in lemma.items():
        click.echo(f"integral ratio n={n}: {ratio:.10g}")
    payload = {
        "weight": w.to_dict(),
        "samples": df.to_dict(orient="list"),
        "doubling": cert.to_dict(),
        "A_hat": a_hat,
        "integral_ratios": {str(n): r for n, r in lemma.items()},
    }
    emit(cfg, "weight", df, payload)


@main.command()
@click.pass_obj
@handles_errors
def construct(cfg: RunConfig) -> None:
    """Build the example or counterexample series."""
    w = cfg.weight.build()
    s = cfg.series.build(w)
    if s.truncated:
        click.echo(f"note: {s.note}")
    show(s.to_frame())
    emit(cfg, "series", s.to_frame(), s.to_dict())


@main.command()
@click.pass_obj
@handles_errors
def membership(cfg: RunConfig) -> None:
    """Gamma profile, coefficient score and the KWW witness."""
    w = cfg.weight.build()
    s = cfg.series.build(w)
    report = gamma_profile(s, w)
    fast = fast_criterion(s, w)
    payload = report.to_dict()
    payload.update({"coefficient_bound": coefficient_bound(s, w), "fast_cap": fast.cap, "A_hat": fast.a_hat})
    if cfg.experiment.N is not None:
        phi_star, alpha_hat = kww_witness(s, w, cfg.experiment.N, cfg.experiment.kww_samples)
        payload.update({"phi_star": phi_star, "alpha_hat": alpha_hat})
        click.echo(f"KWW witness: phi*={phi_star:.8g} alpha_hat={alpha_hat:.6g}")
    show(report.to_frame())
    click.echo(f"gamma_sup={report.gamma_sup:.6g} trend={report.trend.value} verdict={report.verdict.value}")
    emit(cfg, "membership", report.to_frame(), payload)


@main.command()
@click.pass_obj
@handles_errors
def profile(cfg: RunConfig) -> None:
    """Circle statistics of u against v on the eps grid."""
    w = cfg.weight.build()
    s = cfg.series.build(w)
    prof = circle_profile(s, w, eps_grid=cfg.experiment.eps_grid, m=cfg.experiment.circle_samples)
    show(prof.to_frame())
    click.echo(f"K_hat={prof.k_hat:.6g}")
    emit(cfg, "profile", prof.to_frame(), prof.to_dict())


@main.command()
@click.pass_obj
@handles_errors
def oscillate(cfg: RunConfig) -> None:
    """Weighted averages I_u along r_N = 1 - 1/n_N and the I_|u| contrast."""
    w = cfg.weight.build()
    s = cfg.series.build(w)
    ex = cfg.experiment
    trace = lil_experiment(s, w, ex.phi_samples, ex.seed, mode=ex.mode, min_loglog=ex.min_loglog, rtol=ex.rtol)
    payload = trace.to_dict()
    if trace.mode == "direct":
        eps = [e for e in ex.eps_grid if e < 0.5]
        # the |u| average never runs tighter than its own default
        contrast = abs_average(s, w, eps_grid=eps, rtol=max(ex.rtol, ABS_AVERAGE_RTOL))
        payload["abs_average"] = [list(row) for row in contrast]
        payload["trivial_bound_ratio"] = trivial_bound_scan(trace)
        show(pd.DataFrame(contrast, columns=["R", "mean_abs_I", "ratio"]))
        click.echo(f"K_hat={trace.k_hat} max |I|/(K_hat log v)={payload['trivial_bound_ratio']:.6g}")
    emit(cfg, "oscillation", trace.to_frame(), payload)


@main.command()
@click.pass_obj
@handles_errors
def lil(cfg: RunConfig) -> None:
    """Moments c_j, B_N, M_N and the running-max LIL ratios."""
    w = cfg.weight.build()
    ex = cfg.experiment
    if ex.chain_count is not None:
        moments = chain_moment_series(w, cfg.series.A, ex.chain_count, seed=cfg.series.seed, rtol=ex.rtol)
    else:
        moments = moment_series(cfg.series.build(w), w, ex.rtol)
    stats = lil_statistics(moments, w, ex.min_loglog)
    trace = lil_experiment(moments, w, ex.phi_samples, ex.seed, min_loglog=ex.min_loglog, rtol=ex.rtol)
    finals = trace.running_max[:, -1]
    finals = finals[~pd.isna(finals)]
    median = float(pd.Series(finals).median()) if finals.size else math.nan
    payload = stats.to_dict()
    payload.update(
        {"seed": ex.seed, "trials": ex.phi_samples, "median_running_max": median, "tolerance": ex.rtol}
    )
    show(stats.to_frame())
    click.echo(f"median running max of S_N/(2 B_N^2 loglog B_N)^(1/2): {median:.6g}")
    emit(cfg, "lil", stats.to_frame(), payload)


if __name__ == "__main__":
    main()
