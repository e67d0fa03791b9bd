"""
Example usage of the CSPC Market Simulator API.

This demonstrates how to run scenarios programmatically.
"""
from src.core import build_scenario, run_simulation
from src.core.metrics import windowed_mean_price
from src.core.scenarios import ONE_HONEST, PROBABILISTIC
from src.utils import ReportGenerator, export_trace


def example_one_honest():
    """Example: One honest provider pulls the others down to their marginal costs."""
    print("📡 CSPC Market Simulator - Programmatic Example\n")

    config = build_scenario("setting1", ONE_HONEST, seed=7, pccs=60)
    print(f"Scenario: {config.name}")
    print(f"Providers: {config.n_providers}, clients: {config.n_clients}\n")

    trace = run_simulation(config)

    print("\n" + "=" * 60)
    print("RESULTS")
    print("=" * 60)
    print(f"Duration: {trace.duration:.2f} seconds")
    print(f"Final sum of absolute error: {trace.final.sum_abs_error:.4f}")
    for j, (price, mc) in enumerate(zip(trace.final.prices, trace.fair_costs)):
        print(f"  WNP {j + 1}: price={price:.4f}  MC={mc:.2f}  {trace.final.conditions[j].value}")

    export_trace(trace, "csv", "runs/example")
    report_path = ReportGenerator("runs/example").generate_html(trace)
    print(f"\n📁 Report: {report_path}")


def example_sigma_sweep():
    """Example: Mean price against the honesty probability of the only cheap provider."""
    print("\n🔁 Sigma sweep on setting2\n")
    for sigma in (0.1, 0.5, 0.9):
        trace = run_simulation(build_scenario("setting2", PROBABILISTIC, sigma=sigma, seed=1, pccs=60))
        ratio = windowed_mean_price(trace, 30) / trace.mean_fair_cost
        print(f"  sigma={sigma}: mean price / MC over last 30 PCCs = {ratio:.3f}")


if __name__ == "__main__":
    example_one_honest()
    example_sigma_sweep()
