"""Run outputs: the energy-trace CSV, the flat verification report JSON, the
effective config echo, and rendered figures alongside the delimited output."""

from __future__ import annotations

import json
import os

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from ..energy import EnergyLedger
from .config import SimConfig, format_config

CSV_HEADER = "t,E,flux,joule_cum,source_cum,residual"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_energy_csv(ledger: EnergyLedger, path: str) -> None:
    """Energy trace rows in run order, 17 significant digits, LF newlines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in ledger.rows():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_report_json(reports: dict, path: str) -> None:
    """Flat JSON object: one numeric field per check plus pass/fail booleans."""
    clean = {}
    for key, value in reports.items():
        if isinstance(value, (bool, np.bool_)):
            clean[key] = bool(value)
        elif isinstance(value, (int, np.integer)):
            clean[key] = int(value)
        else:
            clean[key] = float(value)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(clean, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_effective_config(cfg: SimConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_config(cfg))


def render_run_figures(ledger: EnergyLedger, out_dir: str) -> list[str]:
    """Energy trace and balance-defect figures next to the CSV."""
    paths = []
    t = ledger.t

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(t, ledger.energy, lw=1.2, label="E(t)")
    ax1.set_ylabel("energy")
    ax1.legend(loc="best", fontsize=8)
    ax2.plot(t, ledger.joule_cum, lw=1.0, label="cumulative Joule work")
    ax2.plot(t, ledger.source_cum, lw=1.0, label="cumulative source work")
    ax2.set_xlabel("t")
    ax2.set_ylabel("work")
    ax2.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = os.path.join(out_dir, "energy_trace.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(t, np.abs(ledger.residual) + 1e-30, lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("|energy balance defect|")
    fig.tight_layout()
    path = os.path.join(out_dir, "balance_residual.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)
    return paths


def render_verify_figures(artifacts: dict, out_dir: str) -> list[str]:
    """Figures for the enabled audits (weak form, Gauss, uniqueness)."""
    paths = []
    if "weakform" in artifacts:
        residuals = artifacts["weakform"]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(range(len(residuals)),
               [abs(r.value) + 1e-30 for r in residuals],
               tick_label=[f"{i}:{r.profile}" for i, r in enumerate(residuals)])
        ax.set_yscale("log")
        ax.set_ylabel("|scaled residual|")
        ax.set_xlabel("test pair")
        fig.tight_layout()
        path = os.path.join(out_dir, "weakform_residuals.png")
        fig.savefig(path, dpi=130)
        plt.close(fig)
        paths.append(path)
    if "gauss" in artifacts:
        gr = artifacts["gauss"]
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(gr.times, gr.divb_defect + 1e-30, lw=1.0,
                    label="div(mu h) drift")
        ax.semilogy(gr.times, gr.charge_defect + 1e-30, lw=1.0,
                    label="charge identity defect")
        ax.set_xlabel("t")
        ax.set_ylabel("max cellwise defect")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, "gauss_defects.png")
        fig.savefig(path, dpi=130)
        plt.close(fig)
        paths.append(path)
    if "uniqueness" in artifacts:
        ur = artifacts["uniqueness"]
        if ur.times is not None:
            fig, ax = plt.subplots(figsize=(7, 4))
            ax.semilogy(ur.times, ur.hat_energy + 1e-40, lw=1.2,
                        label="hat-field energy")
            ax.semilogy(ur.times, ur.envelope, lw=1.0, ls="--",
                        label="Gronwall envelope")
            ax.set_xlabel("t")
            ax.set_ylabel("energy")
            ax.legend(loc="best", fontsize=8)
            fig.tight_layout()
            path = os.path.join(out_dir, "gronwall_envelope.png")
            fig.savefig(path, dpi=130)
            plt.close(fig)
            paths.append(path)
    return paths


def render_selftest_figure(norms_initial: float, norms_final: float,
                           report: dict, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    keys = ["nonexpansive_worst_excess", "derivative_worst_residual",
            "adjoint_worst_residual"]
    ax.bar(range(len(keys)), [report[k] + 1e-30 for k in keys],
           tick_label=["nonexpansive", "derivative", "adjoint"])
    ax.set_yscale("log")
    ax.set_ylabel("worst residual over trials")
    fig.tight_layout()
    path = os.path.join(out_dir, "steklov_selftest.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
