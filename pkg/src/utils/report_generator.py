"""HTML run reports."""
import logging
from pathlib import Path
from typing import List, Optional

from jinja2 import Template

from src.config import settings
from src.core.metrics import demand_consistency_check, windowed_mean_price
from src.exceptions import ExportError
from src.models import SimTrace

logger = logging.getLogger(__name__)


class ReportGenerator:
    """Generate HTML reports from simulation traces."""

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = Path(output_dir or settings.output_dir)

    def generate_html(self, trace: SimTrace, output_path: Optional[str] = None, charts: Optional[List[str]] = None) -> str:
        """Write the report and return its path.

        Args:
            trace: Completed trace
            output_path: Defaults to <output_dir>/report.html
            charts: SVG file names (relative to the report) to embed
        """
        path = Path(output_path) if output_path else self.output_dir / "report.html"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self._render(trace, charts or []), encoding="utf-8")
        except OSError as e:
            raise ExportError(e.strerror or str(e), path=str(path)) from e
        logger.info(f"Report saved to {path}")
        return str(path)

    def _render(self, trace: SimTrace, charts: List[str]) -> str:
        template = Template("""
<!DOCTYPE html>
<html>
<head>
    <meta charset="UTF-8">
    <title>CSPC Run Report - {{ trace.config.name }}</title>
    <style>{{ css }}</style>
</head>
<body>
    <div class="header">
        <h1>CSPC Market Simulation Report</h1>
        <div class="metadata">
            <p><strong>Scenario:</strong> {{ trace.config.name }}</p>
            <p><strong>Seed:</strong> {{ trace.seed }}</p>
            <p><strong>Started:</strong> {{ trace.started_at.strftime('%Y-%m-%d %H:%M:%S') }}</p>
            <p><strong>Duration:</strong> {{ "%.2f"|format(trace.duration) }} seconds</p>
            <p><strong>Providers:</strong> {{ trace.n_providers }}, <strong>PCCs:</strong> {{ trace.records|length }}</p>
        </div>
    </div>

    {% if final %}
    <div class="summary">
        <h2>Final PCC</h2>
        <div class="stats-grid">
            <div class="stat-box">
                <div class="stat-number">{{ "%.4f"|format(final.sum_abs_error) }}</div>
                <div class="stat-label">Sum of absolute error</div>
            </div>
            <div class="stat-box">
                <div class="stat-number">{{ "%.4f"|format(final.mean_price) }}</div>
                <div class="stat-label">Mean price</div>
            </div>
            <div class="stat-box">
                <div class="stat-number">{{ "%.4f"|format(trace.mean_fair_cost) }}</div>
                <div class="stat-label">Mean marginal cost</div>
            </div>
            <div class="stat-box">
                <div class="stat-number">{{ "%.4f"|format(windowed) }}</div>
                <div class="stat-label">Mean price, last {{ window }} PCCs</div>
            </div>
        </div>
    </div>

    <h2>Providers</h2>
    <table>
        <tr><th>WNP</th><th>MC</th><th>Price</th><th>Cap</th><th>Load</th><th>PRB</th><th>Condition</th><th>Demand consistent</th></tr>
        {% for j in range(trace.n_providers) %}
        <tr class="{{ final.conditions[j].value }}">
            <td>{{ j + 1 }}</td>
            <td>{{ "%.4f"|format(trace.fair_costs[j]) }}</td>
            <td>{{ "%.4f"|format(final.prices[j]) }}</td>
            <td>{{ "%.4f"|format(final.caps[j]) }}</td>
            <td>{{ "%.3f"|format(final.loads[j]) }}</td>
            <td>{{ "%.3f"|format(final.prb_totals[j]) }}</td>
            <td>{{ final.conditions[j].value }}</td>
            <td>{{ "yes" if consistent[j] else "no" }}</td>
        </tr>
        {% endfor %}
    </table>
    {% endif %}

    {% for chart in charts %}
    <div class="chart"><img src="{{ chart }}" alt="{{ chart }}"></div>
    {% endfor %}

    <h2>PCC History</h2>
    <table>
        <tr><th>PCC</th><th>Mean price</th><th>Error</th><th>BAIs</th><th>Conditions</th></tr>
        {% for record in trace.records %}
        <tr>
            <td>{{ record.f }}</td>
            <td>{{ "%.4f"|format(record.mean_price) }}</td>
            <td>{{ "%.4f"|format(record.sum_abs_error) }}</td>
            <td>{{ record.bai_count }}</td>
            <td>{{ record.conditions|map(attribute='value')|join(', ') }}</td>
        </tr>
        {% endfor %}
    </table>

    <div class="footer">
        <p>Generated by {{ app_name }} v{{ app_version }}</p>
    </div>
</body>
</html>
        """)

        final = trace.final
        window = min(30, len(trace.records))
        return template.render(
            trace=trace,
            final=final,
            window=window,
            windowed=windowed_mean_price(trace, window) if window else 0.0,
            consistent=demand_consistency_check(trace) if final else [],
            charts=charts,
            css=self._get_css(),
            app_name=settings.app_name,
            app_version=settings.app_version
        )

    def _get_css(self) -> str:
        return """
            body { font-family: Arial, sans-serif; line-height: 1.6; color: #333; margin: 2cm; }
            .header { border-bottom: 3px solid #2c3e50; padding-bottom: 20px; margin-bottom: 30px; }
            h1 { color: #2c3e50; margin: 0 0 20px 0; }
            h2 { color: #34495e; border-bottom: 2px solid #ecf0f1; padding-bottom: 10px; margin-top: 30px; }
            .metadata p { margin: 5px 0; }
            .summary { background: #f8f9fa; padding: 20px; border-radius: 5px; margin: 20px 0; }
            .stats-grid { display: grid; grid-template-columns: repeat(4, 1fr); gap: 15px; margin: 20px 0; }
            .stat-box { background: white; padding: 15px; border-radius: 5px; text-align: center; border-left: 4px solid #3498db; }
            .stat-number { font-size: 24px; font-weight: bold; color: #2c3e50; }
            .stat-label { font-size: 12px; color: #7f8c8d; margin-top: 5px; }
            table { border-collapse: collapse; width: 100%; font-size: 12px; }
            th, td { border: 1px solid #ddd; padding: 4px 8px; text-align: right; }
            th { background: #0066cc; color: white; }
            tr.fair_priced td { background: #d4edda; }
            tr.capacity_limited td { background: #fcf3cf; }
            tr.over_priced td { background: #fadbd8; }
            .chart img { max-width: 100%; margin: 20px 0; }
            .footer { margin-top: 40px; padding-top: 20px; border-top: 1px solid #ddd; font-size: 12px; color: #7f8c8d; text-align: center; }
        """
