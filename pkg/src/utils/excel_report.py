"""
Excel report generation for simulation runs.
Exports a trace to XLSX format.
"""
import io

from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from src.core.metrics import windowed_mean_price
from src.models import PccCondition, SimTrace

CONDITION_FILLS = {
    PccCondition.FAIR_PRICED: "C6EFCE",
    PccCondition.CAPACITY_LIMITED: "FFEB9C",
    PccCondition.OVER_PRICED: "FFC7CE",
}


def generate_excel_report(trace: SimTrace) -> io.BytesIO:
    """
    Generate an Excel (XLSX) workbook of a simulation trace.

    Args:
        trace: The trace to export

    Returns:
        BytesIO object containing the Excel file
    """
    wb = Workbook()

    ws_summary = wb.active
    ws_summary.title = "Summary"
    _create_summary_sheet(ws_summary, trace)

    ws_pccs = wb.create_sheet("PCC Details")
    _create_pcc_sheet(ws_pccs, trace)

    ws_providers = wb.create_sheet("Providers")
    _create_provider_sheet(ws_providers, trace)

    output = io.BytesIO()
    wb.save(output)
    output.seek(0)

    return output


def _header_row(ws, headers):
    header_font = Font(bold=True, color="FFFFFF")
    header_fill = PatternFill(start_color="0066CC", end_color="0066CC", fill_type="solid")
    border = _thin_border()
    for col, header in enumerate(headers, 1):
        cell = ws.cell(row=1, column=col)
        cell.value = header
        cell.font = header_font
        cell.fill = header_fill
        cell.alignment = Alignment(horizontal='center', vertical='center')
        cell.border = border
        ws.column_dimensions[get_column_letter(col)].width = max(12, len(header) + 2)


def _thin_border() -> Border:
    return Border(
        left=Side(style='thin'),
        right=Side(style='thin'),
        top=Side(style='thin'),
        bottom=Side(style='thin')
    )


def _create_summary_sheet(ws, trace: SimTrace):
    """Run overview and final metrics."""
    ws['A1'] = "CSPC Simulation Summary"
    ws['A1'].font = Font(bold=True, size=16)
    ws.merge_cells('A1:B1')

    final = trace.final
    window = min(30, len(trace.records))
    row = 3
    info_items = [
        ("Scenario:", trace.config.name),
        ("Seed:", str(trace.seed)),
        ("Started:", trace.started_at.strftime('%Y-%m-%d %H:%M:%S')),
        ("Duration:", f"{trace.duration:.2f} seconds"),
        ("Providers (N):", trace.n_providers),
        ("PCCs run:", len(trace.records)),
        ("", ""),
        ("Mean marginal cost:", trace.mean_fair_cost),
        ("Final mean price:", final.mean_price if final else "N/A"),
        ("Final sum of absolute error:", final.sum_abs_error if final else "N/A"),
        (f"Mean price, last {window} PCCs:", windowed_mean_price(trace, window) if window else "N/A"),
    ]

    for label, value in info_items:
        ws[f'A{row}'] = label
        ws[f'B{row}'] = value
        ws[f'A{row}'].font = Font(bold=True)
        row += 1

    ws.column_dimensions['A'].width = 32
    ws.column_dimensions['B'].width = 40


def _create_pcc_sheet(ws, trace: SimTrace):
    """One row per PCC, conditions colour coded."""
    n = trace.n_providers
    headers = ["PCC"]
    headers += [f"Price {j + 1}" for j in range(n)]
    headers += [f"Cap {j + 1}" for j in range(n)]
    headers += [f"Load {j + 1}" for j in range(n)]
    headers += [f"PRB {j + 1}" for j in range(n)]
    headers += [f"Condition {j + 1}" for j in range(n)]
    headers += ["Mean Price", "Sum Abs Error", "BAIs"]
    _header_row(ws, headers)

    border = _thin_border()
    for row, record in enumerate(trace.records, 2):
        values = [record.f, *record.prices, *record.caps, *record.loads, *record.prb_totals]
        values += [condition.value for condition in record.conditions]
        values += [record.mean_price, record.sum_abs_error, record.bai_count]
        for col, value in enumerate(values, 1):
            ws.cell(row=row, column=col, value=value).border = border

        for j, condition in enumerate(record.conditions):
            color = CONDITION_FILLS[condition]
            ws.cell(row=row, column=2 + 4 * n + j).fill = PatternFill(start_color=color, end_color=color, fill_type="solid")


def _create_provider_sheet(ws, trace: SimTrace):
    """Per-provider outcome at the final PCC."""
    _header_row(ws, ["WNP", "Marginal Cost", "Final Price", "Final Cap", "Final Load", "Profit", "Error %", "Honest PCCs"])
    final = trace.final
    if final is None:
        return

    border = _thin_border()
    for j, fair_cost in enumerate(trace.fair_costs):
        honest_count = sum(1 for record in trace.records if record.honesty_draws[j])
        values = [
            j + 1,
            fair_cost,
            final.prices[j],
            final.caps[j],
            final.loads[j],
            final.profits[j],
            100.0 * (final.prices[j] - fair_cost) / fair_cost,
            honest_count,
        ]
        for col, value in enumerate(values, 1):
            ws.cell(row=j + 2, column=col, value=value).border = border
