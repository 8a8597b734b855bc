"""Result tables: per-category/per-model score grids and correlation reports.

A fixture of published results ships with the package so the table layout
and ranking logic can be exercised without any model inference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

from .stats import CorrelationResult

PathLike = Union[str, Path]

CATEGORY_LABELS = {
    "color": "Color",
    "shape": "Shape",
    "texture": "Texture",
    "spatial": "Spatial",
    "non_spatial": "Non-spatial",
    "complex": "Complex",
}
METRIC_LABELS = {
    "clip": "CLIP",
    "b_clip": "B-CLIP",
    "b_vqa": "B-VQA",
    "unidet": "UniDet",
    "three_in_one": "3-in-1",
    "mgpt": "mGPT",
    "mgpt_cot": "mGPT-CoT",
    "human": "Human",
}


@dataclass
class ResultTable:
    """model -> category -> metric -> value."""

    values: dict[str, dict[str, dict[str, float]]]
    metrics_by_category: dict[str, list[str]] = field(default_factory=dict)

    def models(self) -> list[str]:
        return list(self.values)

    def categories(self) -> list[str]:
        seen: list[str] = []
        for model_values in self.values.values():
            for category in model_values:
                if category not in seen:
                    seen.append(category)
        return seen

    def metrics_for(self, category: str) -> list[str]:
        if category in self.metrics_by_category:
            return self.metrics_by_category[category]
        metrics: list[str] = []
        for model_values in self.values.values():
            for metric in model_values.get(category, {}):
                if metric not in metrics:
                    metrics.append(metric)
        return metrics

    def leader(self, category: str, metric: str) -> str:
        """Model with the highest value for (category, metric)."""
        best_model, best = None, float("-inf")
        for model, model_values in self.values.items():
            value = model_values.get(category, {}).get(metric)
            if value is not None and value > best:
                best_model, best = model, value
        if best_model is None:
            raise KeyError(f"no values for {category}/{metric}")
        return best_model

    def rankings(self) -> dict[str, dict[str, str]]:
        out: dict[str, dict[str, str]] = {}
        for category in self.categories():
            out[category] = {
                metric: self.leader(category, metric)
                for metric in self.metrics_for(category)
            }
        return out


def load_fixture(path: Optional[PathLike] = None) -> ResultTable:
    """Load a results fixture; defaults to the packaged published numbers."""
    if path is None:
        text = resources.files("compbench.data").joinpath("reference_tables.json").read_text()
    else:
        text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    values: dict[str, dict[str, dict[str, float]]] = {}
    for category, per_model in data["values"].items():
        for model, metrics in per_model.items():
            values.setdefault(model, {})[category] = dict(metrics)
    return ResultTable(values=values, metrics_by_category=data.get("metrics_by_category", {}))


def table_from_summaries(per_model_summaries: dict[str, dict[str, Any]]) -> ResultTable:
    """Build a ResultTable from evaluation summaries keyed by model name."""
    values: dict[str, dict[str, dict[str, float]]] = {}
    for model, summary in per_model_summaries.items():
        values[model] = {
            category: dict(metric_means)
            for category, metric_means in summary.get("per_category", {}).items()
        }
    return ResultTable(values=values)


def render_table(table: ResultTable, precision: int = 4) -> str:
    """Plain-text grid: one block of columns per category, one row per model."""
    categories = table.categories()
    lines = []
    for category in categories:
        metrics = table.metrics_for(category)
        header = [CATEGORY_LABELS.get(category, category)] + [
            METRIC_LABELS.get(m, m) for m in metrics
        ]
        widths = [max(14, len(header[0]))] + [max(8, len(h)) for h in header[1:]]
        lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for model in table.models():
            row = [model.ljust(widths[0])]
            for metric, width in zip(metrics, widths[1:]):
                value = table.values.get(model, {}).get(category, {}).get(metric)
                cell = f"{value:.{precision}f}" if value is not None else "-"
                row.append(cell.ljust(width))
            lines.append("  ".join(row))
        lines.append("")
    return "\n".join(lines)


def render_correlation_table(
    rows: list[dict[str, Any]], precision: int = 4
) -> str:
    """Rows of {metric, category, tau, rho, n} as a plain-text table."""
    header = ["Metric", "Category", "tau", "rho", "n"]
    widths = [10, 12, 8, 8, 6]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append(
            "  ".join(
                [
                    METRIC_LABELS.get(row["metric"], row["metric"]).ljust(widths[0]),
                    CATEGORY_LABELS.get(row["category"], row["category"]).ljust(widths[1]),
                    f"{row['tau']:.{precision}f}".ljust(widths[2]),
                    f"{row['rho']:.{precision}f}".ljust(widths[3]),
                    str(row["n"]).ljust(widths[4]),
                ]
            )
        )
    return "\n".join(lines)


def correlation_rows(
    results: dict[tuple[str, str], CorrelationResult]
) -> list[dict[str, Any]]:
    rows = []
    for (metric, category), result in sorted(results.items()):
        rows.append({"metric": metric, "category": category, **result.to_dict()})
    return rows
