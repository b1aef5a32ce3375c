"""Excel summary workbook for experiment results."""

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from openpyxl import Workbook, load_workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

logger = logging.getLogger(__name__)


class SummaryExporter:
    """Writes summary tables to a styled workbook, one sheet per table."""

    def __init__(self, title: str):
        """Initialize the exporter.

        Args:
            title: Experiment name used as the sheet name prefix.
        """
        self.title = title

        self.header_font_white = Font(bold=True, size=12, color="FFFFFF")
        self.header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
        self.title_font = Font(bold=True, size=11)
        self.title_fill = PatternFill(start_color="D9E2F3", end_color="D9E2F3", fill_type="solid")
        self.border = Border(
            left=Side(style='thin'),
            right=Side(style='thin'),
            top=Side(style='thin'),
            bottom=Side(style='thin')
        )
        self.flag_true = Font(color="006400")  # Dark green
        self.flag_false = Font(color="8B0000")  # Dark red

    def export(self, file_path: str | Path, tables: dict[str, pd.DataFrame],
               append_to_existing: bool = False) -> None:
        """Write every table to its own sheet.

        Args:
            file_path: Path of the .xlsx file.
            tables: Table name to DataFrame.
            append_to_existing: Add sheets to an existing workbook instead
                of replacing it.
        """
        file_path = Path(file_path)
        if append_to_existing and file_path.exists():
            wb = load_workbook(file_path)
        else:
            wb = Workbook()
            wb.remove(wb.active)

        for name, table in tables.items():
            sheet_name = self._unique_sheet_name(wb, f"{self.title}_{name}")
            self._write_table(wb.create_sheet(sheet_name), name, table)

        if not wb.sheetnames:
            wb.create_sheet("empty").cell(row=1, column=1, value="No summary tables")
        wb.save(file_path)
        logger.info("Wrote %d summary sheet(s) to %s", len(tables), file_path)

    @staticmethod
    def _unique_sheet_name(wb, base: str) -> str:
        base = base[:28]  # Excel limit is 31
        name, counter = base, 1
        while name in wb.sheetnames:
            name = f"{base}_{counter}"
            counter += 1
        return name

    def _write_table(self, ws, name: str, table: pd.DataFrame) -> None:
        columns = list(table.columns)
        width = max(1, len(columns))

        ws.cell(row=1, column=1, value=f"{self.title}: {name}")
        if width > 1:
            ws.merge_cells(start_row=1, start_column=1, end_row=1, end_column=width)
        for col in range(1, width + 1):
            cell = ws.cell(row=1, column=col)
            cell.font = self.title_font
            cell.fill = self.title_fill
            cell.border = self.border

        for col, header in enumerate(columns, 1):
            cell = ws.cell(row=2, column=col, value=str(header))
            cell.font = self.header_font_white
            cell.fill = self.header_fill
            cell.border = self.border
            cell.alignment = Alignment(horizontal='center')

        for row, values in enumerate(table.itertuples(index=False), 3):
            for col, value in enumerate(values, 1):
                cell = ws.cell(row=row, column=col, value=self._cell_value(value))
                cell.border = self.border
                if isinstance(value, (bool, np.bool_)):
                    cell.font = self.flag_true if value else self.flag_false
                elif isinstance(cell.value, float):
                    cell.number_format = '0.000000'
                    cell.alignment = Alignment(horizontal='right')

        for col, header in enumerate(columns, 1):
            ws.column_dimensions[get_column_letter(col)].width = max(12, len(str(header)) + 2)

    @staticmethod
    def _cell_value(value):
        if hasattr(value, "item"):
            value = value.item()
        if isinstance(value, float) and not math.isfinite(value):
            return str(value)
        return value
