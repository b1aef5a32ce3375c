"""Tests for the Excel summary workbook."""

import pandas as pd
from openpyxl import load_workbook

from trpcalab.export.excel_export import SummaryExporter


def _tables():
    return {
        "means": pd.DataFrame({"n1": [8, 16], "ratio": [0.41, 0.52]}),
        "pass_rates": pd.DataFrame({"n1": [8], "flag": ["passed"], "rate": [0.9], "ok": [True]}),
        "trends": pd.DataFrame({"pvalue": [float("nan")]}),
    }


def test_one_sheet_per_table(tmp_path):
    path = tmp_path / "summary.xlsx"
    SummaryExporter("certify").export(path, _tables())
    wb = load_workbook(path)
    assert wb.sheetnames == ["certify_means", "certify_pass_rates", "certify_trends"]

    ws = wb["certify_means"]
    assert ws.cell(row=1, column=1).value == "certify: means"
    assert [ws.cell(row=2, column=c).value for c in (1, 2)] == ["n1", "ratio"]
    assert ws.cell(row=3, column=2).value == 0.41
    assert ws.cell(row=4, column=1).value == 16
    assert ws.cell(row=2, column=1).fill.start_color.rgb.endswith("4472C4")


def test_flags_and_non_finite_values(tmp_path):
    path = tmp_path / "summary.xlsx"
    SummaryExporter("certify").export(path, _tables())
    wb = load_workbook(path)
    flag = wb["certify_pass_rates"].cell(row=3, column=4)
    assert flag.value is True
    assert flag.font.color.rgb.endswith("006400")
    assert wb["certify_trends"].cell(row=3, column=1).value == "nan"


def test_append_to_existing_workbook(tmp_path):
    path = tmp_path / "summary.xlsx"
    exporter = SummaryExporter("sign")
    exporter.export(path, {"means": pd.DataFrame({"ratio": [1.0]})})
    exporter.export(path, {"means": pd.DataFrame({"ratio": [2.0]})}, append_to_existing=True)
    assert load_workbook(path).sheetnames == ["sign_means", "sign_means_1"]


def test_empty_tables_still_write_a_workbook(tmp_path):
    path = tmp_path / "empty.xlsx"
    SummaryExporter("sign").export(path, {})
    assert load_workbook(path).sheetnames == ["empty"]
