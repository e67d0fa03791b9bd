"""Command-line interface for the CSPC market simulator."""
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click
import pandas as pd

from src.config import Settings, settings
from src.core.engine import run_simulation
from src.core.market import capacities, fair_marginal_costs
from src.core.metrics import windowed_mean_price
from src.core.scenarios import (
    CUSTOM,
    DEFAULT_SWITCH_PCC,
    PROBABILISTIC,
    SCENARIOS,
    SETTINGS,
    WINDOW_PCCS,
    build_scenario,
    load_preset,
)
from src.exceptions import ConfigError, CspcError, ExportError
from src.models import ExportFormat, RunManifest, ScenarioConfig
from src.utils.charts import render_charts
from src.utils.config_loader import load_config
from src.utils.excel_report import generate_excel_report
from src.utils.report_generator import ReportGenerator
from src.utils.trace_export import export_trace

# Configure logging
logging.basicConfig(
    level=settings.log_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_CONFIG = 3
EXIT_RUNTIME = 4
EXIT_IO = 5


def _fail(message: str, code: int):
    click.echo(f"❌ Error: {message}", err=True)
    sys.exit(code)


def _default_output_dir() -> str:
    # Read at invocation so CSPC_OUTPUT_DIR set after import still applies
    return Settings().output_dir


def _resolve_config(
    config_path: Optional[str],
    preset: Optional[str],
    scenario: Optional[str],
    sigma: Optional[float],
    switch_pcc: Optional[int],
    seed: Optional[int],
    pccs: Optional[int]
) -> ScenarioConfig:
    """Config file or preset, composed with the requested scenario and overrides."""
    if config_path is None and preset is None:
        raise ConfigError("give --config or --preset")
    if config_path is not None:
        base = load_config(config_path)
        return build_scenario(
            preset=preset,
            scenario=scenario or CUSTOM,
            sigma=sigma,
            switch_pcc=switch_pcc,
            seed=seed,
            pccs=pccs,
            base=base
        )
    return build_scenario(
        preset=preset,
        scenario=scenario or next(iter(SCENARIOS)),
        sigma=sigma,
        switch_pcc=switch_pcc,
        seed=seed if seed is not None else settings.default_seed,
        pccs=pccs if pccs is not None else settings.default_pccs
    )


def _handle(fn):
    """Map the exception hierarchy onto exit codes."""
    try:
        return fn()
    except ConfigError as e:
        _fail(str(e), EXIT_CONFIG)
    except (ExportError, OSError) as e:
        _fail(str(e), EXIT_IO)
    except CspcError as e:
        _fail(str(e), EXIT_RUNTIME)
    except Exception as e:
        logger.exception("Unexpected failure")
        _fail(str(e), EXIT_RUNTIME)


@click.command()
@click.option('--config', 'config_path', default=None, type=click.Path(dir_okay=False), help='Scenario config file (.json, .toml, .yaml)')
@click.option('--preset', default=None, type=click.Choice(sorted(SETTINGS)), help='Built-in market setting')
@click.option('--scenario', default=None, type=click.Choice(list(SCENARIOS) + [CUSTOM]), help='Scenario honesty policies')
@click.option('--sigma', default=None, type=float, help='Honesty probability for the probabilistic scenario')
@click.option('--switch-pcc', default=None, type=int, help='Last honest PCC of the switching provider')
@click.option('--seed', default=None, type=click.IntRange(0, 2 ** 64 - 1), help='Random seed')
@click.option('--pccs', default=None, type=click.IntRange(min=1), help='Number of PCCs (F)')
@click.option('--out', 'output_dir', default=_default_output_dir, help='Output directory')
@click.option('--format', 'formats', multiple=True, type=click.Choice([f.value for f in ExportFormat]), default=['csv'], help='Trace table format (repeatable)')
@click.option('--long', 'long_format', is_flag=True, help='Also write one row per PCC and provider')
@click.option('--charts', is_flag=True, help='Render SVG price and error charts')
@click.option('--xlsx', is_flag=True, help='Write an Excel workbook')
@click.option('--report', is_flag=True, help='Write an HTML run report')
@click.option('--workers', default=None, type=click.IntRange(min=1), help='Client solver threads')
def run(config_path, preset, scenario, sigma, switch_pcc, seed, pccs, output_dir, formats, long_format, charts, xlsx, report, workers):
    """Run one simulation and export its trace."""

    def _run():
        config = _resolve_config(config_path, preset, scenario, sigma, switch_pcc, seed, pccs)
        manifest = RunManifest(
            config_path=config_path,
            preset=preset,
            scenario=scenario or (CUSTOM if config_path else next(iter(SCENARIOS))),
            seed=config.seed,
            output_dir=output_dir,
            formats=[ExportFormat(f) for f in formats],
            long_format=long_format,
            charts=charts
        )

        click.echo(f"🚀 Running {config.name}")
        click.echo(f"📊 N={config.n_providers}, M={config.n_clients}, F={config.max_pccs}, T={config.max_bais}, seed={config.seed}")

        trace = run_simulation(config, workers=workers)
        final = trace.final

        out = Path(output_dir)
        written: List[Path] = []
        for i, fmt in enumerate(manifest.formats):
            written += export_trace(trace, fmt, out, long_format=long_format and i == 0)
        chart_files = render_charts(trace, out) if charts else []
        written += chart_files
        if xlsx:
            path = out / "trace.xlsx"
            try:
                path.write_bytes(generate_excel_report(trace).getvalue())
            except OSError as e:
                raise ExportError(e.strerror or str(e), path=str(path)) from e
            written.append(path)
        if report:
            written.append(Path(ReportGenerator(str(out)).generate_html(trace, charts=[p.name for p in chart_files])))
        manifest_path = out / "manifest.json"
        try:
            manifest_path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
        except OSError as e:
            raise ExportError(e.strerror or str(e), path=str(manifest_path)) from e

        click.echo(f"\n✅ Simulation completed in {trace.duration:.2f}s")
        click.echo(f"📈 Final mean price: {final.mean_price}")
        click.echo(f"🎯 Final sum of absolute error: {final.sum_abs_error}")
        click.echo(f"💰 Mean marginal cost: {trace.mean_fair_cost}")
        for j in range(trace.n_providers):
            click.echo(
                f"   WNP {j + 1}: price={final.prices[j]} MC={trace.fair_costs[j]} "
                f"cap={final.caps[j]} {final.conditions[j].value}"
            )
        click.echo(f"📁 Wrote {len(written)} files to {out}")

    _handle(_run)


def _parse_grid(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{text}'")
    if not values:
        raise click.BadParameter("grid is empty")
    return values


@click.command()
@click.option('--preset', default='setting2', type=click.Choice(sorted(SETTINGS)), help='Built-in market setting')
@click.option('--sigma-grid', default='0.1,0.5,0.9', help='Comma-separated honesty probabilities')
@click.option('--replicates', default=10, type=click.IntRange(min=1), help='Seeds per sigma')
@click.option('--seed', default=None, type=click.IntRange(0, 2 ** 64 - 1), help='First seed; replicate r uses seed + r')
@click.option('--pccs', default=None, type=click.IntRange(min=1), help='Number of PCCs (F)')
@click.option('--window', default=WINDOW_PCCS, type=click.IntRange(min=1), help='PCCs averaged at the end of each run')
@click.option('--out', 'output_dir', default=_default_output_dir, help='Output directory')
@click.option('--workers', default=None, type=click.IntRange(min=1), help='Client solver threads')
def sweep(preset, sigma_grid, replicates, seed, pccs, window, output_dir, workers):
    """Probabilistic-honesty scenario over a sigma grid and several seeds."""
    sigmas = _parse_grid(sigma_grid)

    def _sweep():
        base_seed = seed if seed is not None else settings.default_seed
        n_pccs = pccs if pccs is not None else settings.default_pccs
        k = min(window, n_pccs)
        rows = []
        click.echo(f"🔁 Sweeping sigma={sigmas} x {replicates} replicates on {preset}")
        for sigma in sigmas:
            for r in range(replicates):
                config = build_scenario(preset, PROBABILISTIC, sigma=sigma, seed=(base_seed + r) % 2 ** 64, pccs=n_pccs)
                trace = run_simulation(config, workers=workers)
                mean_price = windowed_mean_price(trace, k)
                rows.append({
                    "sigma": sigma,
                    "replicate": r,
                    "seed": config.seed,
                    "windowed_mean_price": mean_price,
                    "ratio_to_mc": mean_price / trace.mean_fair_cost,
                    "final_sum_abs_error": trace.final.sum_abs_error,
                })

        frame = pd.DataFrame(rows)
        out = Path(output_dir)
        path = out / "sweep.csv"
        try:
            out.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path, index=False)
        except OSError as e:
            raise ExportError(e.strerror or str(e), path=str(path)) from e

        click.echo(f"\n✅ Sweep completed ({len(rows)} runs), mean price over last {k} PCCs / MC:")
        stats = frame.groupby("sigma")["ratio_to_mc"].agg(["median", "min", "max"])
        for sigma, row in stats.iterrows():
            click.echo(f"   sigma={sigma}: median={row['median']:.4f} min={row['min']:.4f} max={row['max']:.4f}")
        click.echo(f"📁 Results saved to: {path}")

    _handle(_sweep)


@click.command()
def presets():
    """List built-in settings and scenarios."""
    for name in sorted(SETTINGS):
        config = load_preset(name)
        click.echo(f"📡 {name}: N={config.n_providers}, M={config.n_clients}")
        click.echo(f"   capacities (Mbps): {capacities(config.wnps).tolist()}")
        click.echo(f"   marginal costs:    {fair_marginal_costs(config.wnps).tolist()}")
        click.echo(f"   switch PCC:        {DEFAULT_SWITCH_PCC[name]}")
    click.echo("\n🎬 Scenarios:")
    for name, description in SCENARIOS.items():
        click.echo(f"   {name}: {description}")
