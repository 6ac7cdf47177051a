"""Text/JSON reports and DOT association diagrams.

The JSON document is the source of truth: the text table is rendered from
it, so ``render_text(json.loads(emit_report(r, "json")))`` reproduces the
text report exactly.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping, Sequence

from .datagen import STUDY_MODELS, SimulationStudy
from .pipeline import AggregateResult, models_within, rank_models

REPORT_FORMAT = "catdapbin.report/1"
SIMULATION_FORMAT = "catdapbin.simulation/1"


def _as_list(results) -> list[AggregateResult]:
    return [results] if isinstance(results, AggregateResult) else list(results)


def analysis_doc(result: AggregateResult) -> dict[str, Any]:
    return {
        "response": result.response,
        "predictors": list(result.predictors),
        "source": result.source,
        "iterations": result.iterations,
        "null_aic": float(result.null_aic),
        "thresholds": {k: float(v) for k, v in result.thresholds.items()},
        "models": [
            {
                "predictors": list(row.predictors),
                "size": row.size,
                "aic": row.aic,
                "total_aic": row.total_aic,
                "best": row.best,
            }
            for row in rank_models(result)
        ],
    }


def report_doc(results, metadata: Mapping[str, Any] | None = None) -> dict[str, Any]:
    return {
        "format": REPORT_FORMAT,
        "metadata": dict(metadata or {}),
        "analyses": [analysis_doc(r) for r in _as_list(results)],
    }


def dumps(doc: Mapping[str, Any]) -> bytes:
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _render_analysis(doc: Mapping[str, Any]) -> list[str]:
    head = f"Response: {doc['response']} ({doc['source']}"
    if doc["source"] == "split-average":
        head += f", {doc['iterations']} iterations"
    lines = [head + ")"]
    if doc["thresholds"]:
        lines.append("Averaged thresholds")
        width = max(len(k) for k in doc["thresholds"])
        for name, value in doc["thresholds"].items():
            lines.append(f"  {name:<{width}}  {value:.6g}")
    models = doc["models"]
    shown = [m for m in models if m["size"] > 0] or models
    labels = [", ".join(m["predictors"]) or "(none)" for m in shown]
    width = max(len("From"), *(len(s) for s in labels))
    lines.append(f"{'':<5} {'From':<{width}}  {'AIC':>12}  {'AIC(total)':>12}")
    last_size = None
    for model, label in zip(shown, labels):
        group = f"{model['size']}var" if model["size"] != last_size else ""
        last_size = model["size"]
        flag = " *" if model["best"] else ""
        lines.append(
            f"{group:<5} {label:<{width}}  {model['aic']:12.3f}  "
            f"{model['total_aic']:12.3f}{flag}"
        )
    best = next(m for m in models if m["best"])
    lines.append(
        "Minimum AIC: " + (", ".join(best["predictors"]) or "(no predictors)")
        + f" [{best['aic']:.3f}]"
    )
    return lines


def render_text(doc: Mapping[str, Any]) -> str:
    """Plain-text tables, one block per analysis, from a report document."""
    blocks = ["\n".join(_render_analysis(a)) for a in doc["analyses"]]
    notes = doc.get("metadata", {}).get("notes", [])
    if notes:
        blocks.append("\n".join(f"note: {n}" for n in notes))
    return "\n\n".join(blocks) + "\n"


def emit_report(results, fmt: str = "text", metadata=None) -> bytes:
    """Report for one or more analyses; ``fmt`` is ``"text"`` or ``"json"``."""
    doc = report_doc(results, metadata)
    if fmt == "json":
        return dumps(doc)
    if fmt == "text":
        return render_text(doc).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(results, aic_margin: float = 2.0, name: str = "associations") -> str:
    """Association diagram over all analysed variables.

    Predictors in the minimum-AIC model get a solid edge into the response;
    predictors that only appear in models within ``aic_margin`` of the
    minimum get a dashed edge.  A pair linked the same way in both
    directions is drawn once with arrowheads at both ends.
    """
    results = _as_list(results)
    nodes = node_names(results)
    edges: dict[tuple[str, str], str] = {}
    for result in results:
        solid = set(result.predictor_names(result.best))
        near: set[str] = set()
        for spec in models_within(result, aic_margin):
            near.update(result.predictor_names(spec))
        for var in result.predictors:
            if var in solid:
                edges[(var, result.response)] = "solid"
            elif var in near:
                edges.setdefault((var, result.response), "dashed")

    lines = [f"digraph {name} {{"]
    lines += [f"  {_quote(n)};" for n in nodes]
    done = set()
    for (src, dst), style in edges.items():
        if (src, dst) in done:
            continue
        attrs = ["style=dashed"] if style == "dashed" else []
        if edges.get((dst, src)) == style:
            attrs.append("dir=both")
            done.add((dst, src))
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_quote(src)} -> {_quote(dst)}{suffix};")
        done.add((src, dst))
    lines.append("}")
    return "\n".join(lines) + "\n"


def simulation_doc(study: SimulationStudy, metadata=None) -> dict[str, Any]:
    cases = []
    for outcome in study.cases:
        cases.append(
            {
                "case": outcome.case_id,
                "data_seed": outcome.data_seed,
                "analysis_seed": outcome.analysis_seed,
                "thresholds": {
                    k: float(v) for k, v in outcome.result.thresholds.items()
                },
                "models": {
                    label: {
                        "predictors": list(STUDY_MODELS[label]),
                        "aic": outcome.model_aic(label, total=False),
                        "total_aic": outcome.model_aic(label),
                    }
                    for label in STUDY_MODELS
                },
                "analysis": analysis_doc(outcome.result),
            }
        )
    return {
        "format": SIMULATION_FORMAT,
        "metadata": dict(metadata or {}),
        "seed": study.master_seed,
        "iterations": study.iterations,
        "grid_size": study.grid_size,
        "cases": cases,
    }


def render_simulation_text(doc: Mapping[str, Any]) -> str:
    cases = doc["cases"]
    head = "".join(f"{'Case ' + str(c['case']):>22}" for c in cases)
    lines = [
        f"Simulation study: seed {doc['seed']}, {doc['iterations']} iterations, "
        f"grid {doc['grid_size']}",
        "",
        "Mean optimum thresholds",
        f"{'':<8}{head}",
    ]
    for var in ("simb", "simc"):
        row = "".join(f"{c['thresholds'][var]:>22.4f}" for c in cases)
        lines.append(f"{var:<8}{row}")
    lines += ["", "Mean AIC, absolute [CATDAP scale]", f"{'':<8}{head}"]
    for label in STUDY_MODELS:
        cells = "".join(
            f"{c['models'][label]['total_aic']:>11.2f} [{c['models'][label]['aic']:>8.2f}]"
            for c in cases
        )
        lines.append(f"{label:<8}{cells}")
    return "\n".join(lines) + "\n"


def emit_simulation_report(study: SimulationStudy, fmt: str = "text", metadata=None) -> bytes:
    doc = simulation_doc(study, metadata)
    if fmt == "json":
        return dumps(doc)
    if fmt == "text":
        return render_simulation_text(doc).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def node_names(results: Iterable[AggregateResult]) -> Sequence[str]:
    seen: list[str] = []
    for r in results:
        for var in (r.response, *r.predictors):
            if var not in seen:
                seen.append(var)
    return seen
