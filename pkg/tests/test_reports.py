"""Tests for the Excel workbook, HTML report and SVG charts."""
import xml.etree.ElementTree as ET

import pytest
from openpyxl import load_workbook

from src.core.engine import run_simulation
from src.utils.charts import render_charts
from src.utils.excel_report import CONDITION_FILLS, generate_excel_report
from src.utils.report_generator import ReportGenerator
from src.models import PccCondition


@pytest.fixture
def trace(one_deviant_market):
    return run_simulation(one_deviant_market.model_copy(update={"max_pccs": 3}))


def test_excel_workbook(trace):
    wb = load_workbook(generate_excel_report(trace))
    assert wb.sheetnames == ["Summary", "PCC Details", "Providers"]

    details = wb["PCC Details"]
    assert details.max_row == 4
    assert details.cell(row=1, column=14).value == "Condition 1"
    condition = details.cell(row=2, column=14)
    assert condition.value == "over_priced"
    assert condition.fill.start_color.rgb.endswith(CONDITION_FILLS[PccCondition.OVER_PRICED])

    assert wb["Providers"].max_row == 4


def test_html_report(trace, tmp_path):
    path = ReportGenerator(str(tmp_path)).generate_html(trace, charts=["prices.svg"])
    html = (tmp_path / "report.html").read_text(encoding="utf-8")
    assert path.endswith("report.html")
    assert trace.config.name in html
    assert "prices.svg" in html


def test_svg_charts(trace, tmp_path):
    paths = render_charts(trace, tmp_path)
    assert [path.name for path in paths] == ["prices.svg", "error.svg"]
    for path in paths:
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")
