# services/report_service.py
"""Persistência dos artefatos da CLI: JSON atômico (schema beg/1), CSV e resumo em PDF."""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import logging
import math
import os
import tempfile
from collections import Counter
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence

from reportlab.lib.colors import black, blue, red
from reportlab.lib.enums import TA_CENTER, TA_JUSTIFY
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer

from montecarlo import ComparisonReport, TripleHistogram
from pipeline import decode_key
from settings import get_settings


logger = logging.getLogger(__name__)

SCHEMA = "beg/1"
DIGITS = 12


def decimal_str(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{DIGITS}f}"


def rational_str(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def resolve_path(out: str, suffix: str) -> str:
    """Nome sem diretório vai para BEG_REPORTS_DIR; extensão é completada se faltar."""
    path = out if out.endswith(suffix) else out + suffix
    if not os.path.dirname(path):
        reports_dir = get_settings().reports_dir
        os.makedirs(reports_dir, exist_ok=True)
        path = os.path.join(reports_dir, path)
    return path


def escrever_json_atomico(path: str, dados: Dict) -> str:
    """Escreve o JSON de forma atômica: temp file -> replace"""
    dir_name = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(dir_name, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=dir_name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as tmpf:
            json.dump(dados, tmpf, ensure_ascii=False, indent=2)
            tmpf.flush()
            os.fsync(tmpf.fileno())
        os.replace(tmp_path, path)
    except Exception:
        try:
            os.remove(tmp_path)
        except OSError:
            pass
        raise
    logger.debug("JSON gravado em %s", path)
    return path


def ler_json(path: str) -> Dict:
    with open(path, encoding="utf-8") as f:
        dados = json.load(f)
    if dados.get("schema") != SCHEMA:
        raise ValueError(f"{path}: schema {dados.get('schema')!r} não suportado (esperado {SCHEMA}).")
    return dados


# ---------- histogramas ----------

def fingerprint(record: Dict) -> str:
    """SHA-256 do conteúdo (sem tempo de execução nem o próprio fingerprint)."""
    config = {k: v for k, v in record.get("config", {}).items() if k != "runtime"}
    payload = {
        "model": record.get("model"),
        "config": config,
        "total": record["total"],
        "unresolved": record["unresolved"],
        "classes": sorted((c["key"], c["count"]) for c in record["classes"]),
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def histogram_record(h: TripleHistogram) -> Dict:
    classes = []
    for key in sorted(h.counts):
        triple, coarse = decode_key(key)
        classes.append({"key": key, "coarse": coarse, "count": h.counts[key], "triple": triple.to_record()})
    record = {
        "schema": SCHEMA,
        "model": h.meta.get("model"),
        "config": dict(h.meta),
        "total": h.total,
        "unresolved": h.unresolved,
        "escalations": h.escalations,
        "classes": classes,
    }
    record["fingerprint"] = fingerprint(record)
    return record


def save_histogram(h: TripleHistogram, out: str) -> str:
    return escrever_json_atomico(resolve_path(out, ".json"), histogram_record(h))


def histogram_from_record(record: Dict) -> TripleHistogram:
    counts = Counter({c["key"]: int(c["count"]) for c in record.get("classes", [])})
    h = TripleHistogram(
        counts=counts,
        total=int(record["total"]),
        unresolved=int(record["unresolved"]),
        escalations=int(record.get("escalations", 0)),
        meta=dict(record.get("config", {})),
    )
    h.check()
    stored = record.get("fingerprint")
    if stored and stored != fingerprint(record):
        raise ValueError("Fingerprint do histograma não confere com o conteúdo.")
    return h


def load_histogram(path: str) -> TripleHistogram:
    return histogram_from_record(ler_json(path))


# ---------- relatórios ----------

def report_record(report: ComparisonReport, failures: Sequence[str] = (), fingerprint_hex: Optional[str] = None) -> Dict:
    p = report.params
    return {
        "schema": SCHEMA,
        "params": {"ell": p.ell, "n": p.n, "t": p.t, "tol": p.tol},
        "bound": report.bound,
        "seed": report.seed,
        "total": report.total,
        "resolved": report.resolved,
        "unresolved": report.unresolved,
        "unresolved_fraction": decimal_str(report.unresolved_fraction),
        "tv": decimal_str(report.tv),
        "chi2": decimal_str(report.chi2),
        "dof": report.dof,
        "p_value": decimal_str(report.p_value),
        "support_mass": decimal_str(report.support_mass),
        "observed_support": decimal_str(report.observed_support),
        "out_of_support": decimal_str(report.out_of_support),
        "runtime": decimal_str(report.runtime),
        "histogram_fingerprint": fingerprint_hex,
        "rows": [
            {
                "key": r.key,
                "label": r.label,
                "corank": r.corank,
                "observed": r.observed,
                "expected": decimal_str(r.expected),
                "z": decimal_str(r.z),
            }
            for r in report.rows
        ],
        "moments": report.moments,
        "acceptance": {"passed": not failures, "failures": list(failures)},
    }


def save_report(report: ComparisonReport, out: str, failures: Sequence[str] = (), fingerprint_hex: Optional[str] = None) -> str:
    return escrever_json_atomico(resolve_path(out, ".json"), report_record(report, failures, fingerprint_hex))


def write_csv(rows: Iterable[Dict], out: str, columns: Sequence[str]) -> str:
    path = resolve_path(out, ".csv")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


# fontes padrão do reportlab não têm estes glifos
PDF_ASCII = str.maketrans({"ω": "w", "ψ": "psi", "χ": "chi", "²": "2", "ℓ": "l", "σ": "sigma"})

REPORT_COLUMNS = ("key", "label", "corank", "observed", "expected", "z")
MEASURE_COLUMNS = ("group", "omega", "psi", "corank", "orbit_size", "rational", "value", "conditional")


def gerar_pdf_relatorio(report: ComparisonReport, out: str, failures: Sequence[str] = (), limite_linhas: int = 40) -> str:
    """Gera um PDF com o resumo da comparação e retorna o caminho do arquivo."""
    filepath = resolve_path(out, ".pdf")
    data_hora = datetime.datetime.now().strftime("%d/%m/%Y %H:%M")

    doc = SimpleDocTemplate(filepath, pagesize=A4)
    styles = getSampleStyleSheet()

    title_style = ParagraphStyle(
        'CustomTitle',
        parent=styles['Heading1'],
        fontSize=18,
        spaceAfter=30,
        alignment=TA_CENTER,
        textColor=blue,
    )
    header_style = ParagraphStyle(
        'CustomHeader',
        parent=styles['Heading2'],
        fontSize=13,
        spaceAfter=10,
        textColor=black,
    )
    content_style = ParagraphStyle(
        'CustomContent',
        parent=styles['Normal'],
        fontSize=10,
        spaceAfter=6,
        alignment=TA_JUSTIFY,
        leftIndent=20,
        rightIndent=20,
    )

    p = report.params
    story = [
        Paragraph("BEG - COMPARAÇÃO MONTE CARLO × TEORIA", title_style),
        Spacer(1, 12),
        Paragraph(f"<b>Parâmetros:</b> l={p.ell}, n={p.n}, t={p.t}, |G| <= {report.bound}, seed={report.seed}", header_style),
        Paragraph(
            f"<b>Amostras:</b> {report.total} ({report.unresolved} sem resolução) em {report.runtime:.1f}s",
            header_style,
        ),
        Paragraph(
            f"<b>TV</b> = {report.tv:.4f} &nbsp; <b>chi2</b> = {report.chi2:.2f} (gl {report.dof}, p = {report.p_value:.4f})"
            f" &nbsp; <b>massa fora do suporte</b> = {report.out_of_support:.4f} (teoria {1 - report.support_mass:.4f})",
            content_style,
        ),
        Spacer(1, 12),
        Paragraph("<b>Classes:</b>", header_style),
    ]
    ordered = sorted(report.rows, key=lambda r: -r.expected)
    for r in ordered[:limite_linhas]:
        story.append(Paragraph(
            f"{r.label.translate(PDF_ASCII)}: observado {r.observed}, esperado {report.resolved * r.expected:.1f}, z = {r.z:.2f}",
            content_style,
        ))
    if len(ordered) > limite_linhas:
        story.append(Paragraph(f"... mais {len(ordered) - limite_linhas} classes no JSON.", content_style))
    story.append(Spacer(1, 20))

    status = "APROVADO" if not failures else "REPROVADO: " + "; ".join(failures).translate(PDF_ASCII)
    footer_style = ParagraphStyle(
        'Footer',
        parent=styles['Normal'],
        fontSize=10,
        alignment=TA_CENTER,
        textColor=red if failures else blue,
    )
    story.append(Paragraph(f"{status} · gerado em {data_hora}", footer_style))

    doc.build(story)
    return filepath
