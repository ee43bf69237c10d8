# app.py
"""Linha de comando: medidas em forma fechada, experimentos de Monte Carlo e oráculos."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from sympy import isprime

from beg import BegTriple, OmegaElement, PsiMap
from core_groups import AbelianLGroup, OracleTooLargeError
from matrix_models import MODELS, PrecisionError, SampleConfig
from measures import (
    MeasureParams,
    class_rows,
    malle_group,
    mu_group,
    mu_point,
    qtmu_group,
    qtmu_point,
)
from montecarlo import Thresholds, acceptance_failures, compare, moment_rows, run_experiment
from services.oracle_service import SUITES, OracleCase, format_results, run_suites
from services.report_service import (
    MEASURE_COLUMNS,
    REPORT_COLUMNS,
    SCHEMA,
    decimal_str,
    escrever_json_atomico,
    gerar_pdf_relatorio,
    histogram_record,
    rational_str,
    resolve_path,
    save_histogram,
    save_report,
    write_csv,
)
from settings import get_settings


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_ACCEPTANCE = 4


class ConfigError(ValueError):
    """Problemas de configuração da CLI, todos reunidos numa única mensagem."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("Configuração inválida: " + "; ".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    ell: int
    n: int
    t: int = 0
    tol: float = 1e-12
    group: Optional[str] = None
    model: str = "linear"
    g: int = 10
    K: Optional[int] = None
    q: Optional[int] = None
    seed: int = 0
    samples: int = 0
    max_resamples: int = 3
    bound: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"
    verbosity: int = 0

    def problems(self) -> List[str]:
        found = []
        if self.ell < 3 or not isprime(self.ell):
            found.append(f"--ell precisa ser um primo ímpar (recebido {self.ell})")
        if self.n < 1:
            found.append(f"--n precisa ser >= 1 (recebido {self.n})")
        if self.t < 0:
            found.append(f"--t precisa ser >= 0 (recebido {self.t})")
        if not self.tol > 0:
            found.append(f"--tol precisa ser > 0 (recebido {self.tol})")
        if self.group is not None and isprime(self.ell) and self.ell >= 3:
            try:
                AbelianLGroup.parse(self.ell, self.group)
            except ValueError as exc:
                found.append(f"--group: {exc}")
        if self.model not in MODELS:
            found.append(f"--model precisa ser um de {', '.join(MODELS)}")
        if self.model == "nonlinear" and self.q is None:
            found.append("--q é obrigatório no modelo nonlinear")
        if self.g < 1:
            found.append(f"--g precisa ser >= 1 (recebido {self.g})")
        if self.K is not None and self.K <= self.n:
            found.append(f"--K precisa ser maior que n (recebido {self.K})")
        if self.q is not None and self.ell >= 3 and self.n >= 1:
            if (self.q - 1) % self.ell**self.n or (self.q - 1) % self.ell ** (self.n + 1) == 0:
                found.append(f"--q={self.q} precisa satisfazer ℓ^n || q - 1")
        if self.samples < 0:
            found.append(f"--N precisa ser >= 0 (recebido {self.samples})")
        if self.max_resamples < 0:
            found.append("--max-resamples precisa ser >= 0")
        if not 0 <= self.seed < 2**64:
            found.append("--seed precisa caber em 64 bits")
        if self.bound is not None and self.bound < 1:
            found.append("--bound precisa ser >= 1")
        if self.format not in ("json", "csv"):
            found.append("--format precisa ser json ou csv")
        return found

    def validate(self) -> "RunConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def measure_params(self) -> MeasureParams:
        return MeasureParams(self.ell, self.n, self.t, self.tol)

    def sample_config(self) -> SampleConfig:
        return SampleConfig(
            self.ell, self.n, self.g, self.K, self.q, self.t, self.seed, self.samples, self.max_resamples
        )

    def parsed_group(self) -> AbelianLGroup:
        return AbelianLGroup.parse(self.ell, self.group or "")


def run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        ell=args.ell,
        n=args.n,
        t=getattr(args, "t", 0) or 0,
        tol=args.tol,
        group=getattr(args, "group", None),
        model=getattr(args, "model", "linear"),
        g=getattr(args, "g", 10),
        K=getattr(args, "K", None),
        q=getattr(args, "q", None),
        seed=getattr(args, "seed", 0),
        samples=getattr(args, "N", 0),
        max_resamples=getattr(args, "max_resamples", 3),
        bound=getattr(args, "bound", None),
        out=getattr(args, "out", None),
        format=getattr(args, "format", "json"),
        verbosity=args.verbose,
    ).validate()


# ---------- measure ----------

def _class_record(row) -> Dict:
    return {
        "group": row.triple.group.label(),
        "omega": json.dumps(row.triple.omega.records()),
        "psi": json.dumps([list(r) for r in row.triple.psi.matrix]),
        "corank": row.corank,
        "orbit_size": row.orbit_size,
        "rational": rational_str(row.measure.rational),
        "value": decimal_str(row.measure.value),
        "conditional": decimal_str(row.conditional),
    }


def _value_record(value) -> Dict:
    return {"rational": rational_str(value.rational), "constant": value.label, "value": decimal_str(value.value)}


def cmd_measure(args: argparse.Namespace) -> Dict:
    """Valores de μ / Q^tμ do grupo e de cada classe de BEG sobre ele."""
    cfg = run_config(args)
    p = cfg.measure_params()
    if not args.triple and cfg.group is None:
        raise ConfigError(["measure precisa de --group ou --triple"])
    report: Dict = {"schema": SCHEMA, "params": {"ell": p.ell, "n": p.n, "t": p.t, "tol": p.tol}}

    if args.triple:
        with open(args.triple, encoding="utf-8") as f:
            triple = BegTriple.from_record(json.load(f))
        point = qtmu_point(triple, p)
        report["triple"] = triple.to_record()
        report["qtmu_point"] = _value_record(point)
        print(f"Q^{p.t}μ({triple.describe()}) = {point}")
        if p.t == 0:
            report["mu_point"] = _value_record(mu_point(triple, p))
        if cfg.group is None:
            return report

    group = cfg.parsed_group()
    group_value = qtmu_group(group, p)
    report["group"] = {"exponents": list(group.exponents), "label": group.label(), "qtmu": _value_record(group_value)}
    print(f"Q^{p.t}μ({group.label()}) = {group_value}")
    if p.t == 0:
        report["group"]["mu"] = _value_record(mu_group(group, p))
    if p.n == 1:
        report["group"]["malle"] = _value_record(malle_group(group, p))

    rows = class_rows(group, p)
    report["classes"] = [_class_record(row) for row in rows]
    print(f"{'corank':>6} {'órbita':>7} {'condicional':>12}  classe")
    for row in rows:
        print(f"{row.corank:>6} {row.orbit_size:>7} {row.conditional:>12.4f}  {row.triple.describe()}")

    if cfg.out:
        if cfg.format == "csv":
            path = write_csv(report["classes"], cfg.out, MEASURE_COLUMNS)
        else:
            path = escrever_json_atomico(resolve_path(cfg.out, ".json"), report)
        print(f"Tabela gravada em {path}")
    return report


# ---------- sample ----------

def _moment_targets(ell: int, n: int) -> List[BegTriple]:
    """(Z/ℓ, 0, ψ = (1)), o alvo padrão dos momentos."""
    group = AbelianLGroup(ell, (1,))
    return [BegTriple(group, n, OmegaElement.zero(group, n), PsiMap(group, n, ((1,),)))]


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    sample_cfg = cfg.sample_config()
    p = cfg.measure_params()
    bound = cfg.bound or cfg.ell**3
    thresholds = Thresholds(z_max=args.z_max, alpha=args.alpha, max_unresolved=args.max_unresolved)
    out = cfg.out or f"sample_{cfg.model}_l{cfg.ell}_n{cfg.n}_t{cfg.t}_seed{cfg.seed}"

    started = time.perf_counter()
    hist = run_experiment(sample_cfg, cfg.model, workers=args.workers)
    hist_path = save_histogram(hist, f"{out}_histogram")
    print(f"Histograma ({hist.total} amostras, {len(hist.counts)} classes) gravado em {hist_path}")
    if hist.total == 0:
        return EXIT_OK

    report = compare(hist, p, bound, runtime=time.perf_counter() - started)
    if hist.resolved:
        report.moments = moment_rows(hist, _moment_targets(cfg.ell, cfg.n), p)
    failures = acceptance_failures(report, thresholds)

    fingerprint_hex = histogram_record(hist)["fingerprint"]
    if cfg.format == "csv":
        path = write_csv(
            ({"key": r.key, "label": r.label, "corank": r.corank, "observed": r.observed,
              "expected": decimal_str(r.expected), "z": decimal_str(r.z)} for r in report.rows),
            f"{out}_report",
            REPORT_COLUMNS,
        )
    else:
        path = save_report(report, f"{out}_report", failures, fingerprint_hex)
    print(f"Relatório gravado em {path}")
    if args.pdf:
        print(f"PDF gravado em {gerar_pdf_relatorio(report, f'{out}_report', failures)}")

    print(f"TV = {report.tv:.4f}  χ² = {report.chi2:.2f} (gl {report.dof}, p = {report.p_value:.4f})")
    for r in sorted(report.rows, key=lambda r: -r.expected)[:15]:
        print(f"  {r.label}: obs {r.observed}, esp {report.resolved * r.expected:.1f}, z = {r.z:.2f}")

    if report.unresolved_fraction > thresholds.max_unresolved:
        print(
            f"Precisão esgotada em {report.unresolved} de {report.total} amostras "
            f"(K={sample_cfg.K}, {args.max_resamples} escalonamentos); aumente --K ou --max-resamples.",
            file=sys.stderr,
        )
        return EXIT_PRECISION
    if failures:
        for failure in failures:
            print(f"⚠️ {failure}", file=sys.stderr)
        if not args.report_only:
            return EXIT_ACCEPTANCE
    return EXIT_OK


# ---------- oracle ----------

def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    ns = (cfg.n,) if args.n_given else None
    ts = (cfg.t,) if args.t_given else None
    if cfg.group is not None:
        case = OracleCase(cfg.ell, (cfg.parsed_group(),), rmax=args.rmax, tmax=args.tmax)
    else:
        case = OracleCase.default(cfg.ell, rmax=args.rmax, tmax=args.tmax)
    if ns:
        case = OracleCase(case.ell, case.groups, ns, case.ts, case.rmax, case.tmax)
    if ts:
        case = OracleCase(case.ell, case.groups, case.ns, ts, case.rmax, case.tmax)

    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, case)
    for line in format_results(results):
        print(line)
    return EXIT_ACCEPTANCE if any(r.status == "FAIL" for r in results) else EXIT_OK


# ---------- parser ----------

def _common(parser: argparse.ArgumentParser, tol: float) -> None:
    parser.add_argument("--ell", type=int, default=3, help="primo ímpar ℓ")
    parser.add_argument("--n", type=int, default=None, help="nível das raízes da unidade (padrão 1)")
    parser.add_argument("--t", type=int, default=None, help="número de quocientes aleatórios (padrão 0)")
    parser.add_argument("--tol", type=float, default=tol, help="tolerância dos produtos infinitos")
    parser.add_argument("--out", default=None, help="arquivo de saída (nome solto vai para BEG_REPORTS_DIR)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    tol = get_settings().tol
    parser = argparse.ArgumentParser(
        prog="beg",
        description="Medidas de Cohen–Lenstra com raízes da unidade sobre grupos com pareamentos.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    measure = sub.add_parser("measure", help="valores exatos de μ e Q^tμ")
    _common(measure, tol)
    measure.add_argument("--group", default=None, help='expoentes, ex. "2,1" ("" = trivial)')
    measure.add_argument("--triple", default=None, help="arquivo JSON com uma tripla")
    measure.set_defaults(func=cmd_measure)

    sample = sub.add_parser("sample", help="experimento de Monte Carlo com matrizes aleatórias")
    _common(sample, tol)
    sample.add_argument("--model", choices=MODELS, default="linear")
    sample.add_argument("--g", type=int, default=10, help="metade da dimensão (matrizes 2g × 2g)")
    sample.add_argument("--K", type=int, default=None, help="precisão de trabalho (padrão n + 12)")
    sample.add_argument("--q", type=int, default=None, help="fator de similitude (modelo nonlinear)")
    sample.add_argument("--N", type=int, default=0, help="número de amostras")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--max-resamples", dest="max_resamples", type=int, default=3)
    sample.add_argument("--bound", type=int, default=None, help="suporte |G| <= bound (padrão ℓ^3)")
    sample.add_argument("--workers", type=int, default=None)
    sample.add_argument("--pdf", action="store_true", help="gera também o resumo em PDF")
    sample.add_argument("--report-only", dest="report_only", action="store_true", help="não falha nos limiares")
    sample.add_argument("--z-max", dest="z_max", type=float, default=3.0)
    sample.add_argument("--alpha", type=float, default=0.01)
    sample.add_argument("--max-unresolved", dest="max_unresolved", type=float, default=0.001)
    sample.set_defaults(func=cmd_sample)

    oracle = sub.add_parser("oracle", help="fórmulas fechadas contra força bruta")
    _common(oracle, tol)
    oracle.add_argument("--suite", choices=("all", *SUITES), default="all")
    oracle.add_argument("--group", default=None)
    oracle.add_argument("--rmax", type=int, default=4)
    oracle.add_argument("--tmax", type=int, default=3)
    oracle.set_defaults(func=cmd_oracle)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        parser = build_parser()
    except RuntimeError as exc:
        # variáveis BEG_* inválidas no ambiente
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    args.n_given = args.n is not None
    args.t_given = args.t is not None
    args.n = 1 if args.n is None else args.n
    args.t = 0 if args.t is None else args.t
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OracleTooLargeError as exc:
        print(f"Limite excedido: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        print(f"Precisão esgotada: valuações {exc.valuations} com K={exc.precision}", file=sys.stderr)
        return EXIT_PRECISION
    except (ValueError, OSError) as exc:
        print(f"Entrada inválida: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
