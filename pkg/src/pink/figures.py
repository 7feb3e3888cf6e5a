"""Matplotlib renderings of the report bundle, written as PNG files.

Figures are derived purely from the structured report data, never from live
grading state, so `pink report` can re-render them at any time.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def fig_leaderboard(leaderboard: dict, path: Path) -> Path:
    entries = leaderboard["entries"]
    models = [e["model_id"] for e in entries][::-1]
    pinks = [e["pink"] for e in entries][::-1]
    bleus = [e["bleu"] for e in entries][::-1]
    y = np.arange(len(models))
    fig, ax = plt.subplots(figsize=(7, 0.5 * len(models) + 1.5))
    ax.barh(y + 0.2, pinks, height=0.38, label="PINK", color="#e75480")
    ax.barh(y - 0.2, bleus, height=0.38, label="BLEU", color="#6baed6")
    ax.set_yticks(y, models)
    ax.set_xlim(0, 1.05)
    ax.set_xlabel("score")
    ax.set_title("Leaderboard: penalized normalized score vs BLEU")
    ax.legend(loc="lower right")
    return _save(fig, path)


def fig_ranking_reversal(rank_deltas: dict, path: Path) -> Path:
    rows = rank_deltas["bleu_vs_pink"]["models"]
    fig, ax = plt.subplots(figsize=(6, 0.6 * len(rows) + 1.5))
    for row in rows:
        ax.plot([0, 1], [row["rank_a"], row["rank_b"]], marker="o")
        ax.annotate(row["model_id"], (0, row["rank_a"]),
                    textcoords="offset points", xytext=(-8, 0), ha="right", fontsize=8)
        delta = row["rank_delta"]
        ax.annotate(f"{delta:+d}" if delta else "=", (1, row["rank_b"]),
                    textcoords="offset points", xytext=(10, 0), fontsize=8)
    ax.set_xticks([0, 1], ["BLEU rank", "PINK rank"])
    ax.invert_yaxis()
    ax.set_ylabel("rank (1 = best)")
    ax.set_title(f"Ranking reversal (tau = {rank_deltas['bleu_vs_pink']['kendall_tau']:.3f})")
    return _save(fig, path)


def fig_heatmap(heatmap: dict, path: Path) -> Path:
    rows = heatmap["rows"]
    matrix = np.array([r["counts"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 0.5 * len(rows) + 2))
    im = ax.imshow(matrix, aspect="auto", cmap="Reds")
    ax.set_xticks(range(len(heatmap["components"])), heatmap["components"],
                  rotation=30, ha="right", fontsize=8)
    ax.set_yticks(range(len(rows)), [r["model_id"] for r in rows], fontsize=8)
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(j, i, int(matrix[i, j]), ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, label="over-correction events")
    ax.set_title("Over-correction events by rubric component (best model first)")
    return _save(fig, path)


def fig_delta_distribution(delta_hist: dict, path: Path) -> Path:
    bins = delta_hist["bins"]
    centers = np.arange(len(bins))
    fig, ax = plt.subplots(figsize=(9, 4))
    width = 0.8 / max(1, len(delta_hist["rows"]))
    for k, row in enumerate(delta_hist["rows"]):
        ax.bar(centers + k * width, row["counts"], width=width, label=row["model_id"])
    step = max(1, len(bins) // 10)
    ax.set_xticks(centers[::step], bins[::step], rotation=45, ha="right", fontsize=7)
    ax.set_xlabel("model total - oracle total")
    ax.set_ylabel("samples")
    ax.set_title("Score difference distribution (right tail = over-correction)")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_penalty_scatter(scatter: dict, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for row in scatter["rows"]:
        xs = [p["pre"] for p in row["points"]]
        ys = [p["post"] for p in row["points"]]
        ax.scatter(xs, ys, alpha=0.6, label=row["model_id"], s=18)
    ax.plot([0, 100], [0, 100], linestyle="--", color="grey", linewidth=1)
    ax.set_xlabel("pre-penalty total")
    ax.set_ylabel("post-penalty total")
    ax.set_title("Penalty scatter: distance below y = x is penalty applied")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_threshold_sweep(sweep: dict, path: Path) -> Path:
    thresholds = sweep["thresholds"]
    taus = [sweep["tau_vs_baseline"][str(t)] for t in thresholds]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(thresholds, taus, marker="o", color="#e75480")
    ax1.axvline(sweep["baseline_threshold"], linestyle=":", color="grey")
    ax1.set_xlabel("penalty threshold T")
    ax1.set_ylabel("Kendall tau vs T=10 ranking")
    ax1.set_ylim(min(0.0, min(taus)) - 0.05, 1.05)
    ax1.set_title("Ranking stability across thresholds")

    models = sorted(sweep["rankings"][str(thresholds[0])])
    for m in models:
        ranks = [sweep["rankings"][str(t)].index(m) + 1 for t in thresholds]
        ax2.plot(thresholds, ranks, marker="o", label=m)
    ax2.invert_yaxis()
    ax2.set_xlabel("penalty threshold T")
    ax2.set_ylabel("rank (1 = best)")
    ax2.set_title("Ranking trajectories")
    ax2.legend(fontsize=7)
    return _save(fig, path)


def fig_oc_rates(leaderboard: dict, path: Path) -> Path:
    aggregates = leaderboard["aggregates"]
    models = [a["model_id"] for a in aggregates]
    rates = [100 * a["oc_rate"] for a in aggregates]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(models, rates, color="#fdae6b")
    ax.set_ylabel("samples with >= 1 over-correction (%)")
    ax.set_title("Over-correction rate per model")
    ax.tick_params(axis="x", rotation=20)
    return _save(fig, path)


def fig_oc_magnitudes(leaderboard: dict, path: Path) -> Path:
    aggregates = leaderboard["aggregates"]
    fig, ax = plt.subplots(figsize=(7, 4))
    bins = None
    width = 0.8 / max(1, len(aggregates))
    for k, agg in enumerate(aggregates):
        hist = agg["oc_histogram"]
        bins = hist["bins"]
        xs = np.arange(len(bins)) + k * width
        ax.bar(xs, hist["counts"], width=width, label=agg["model_id"])
    if bins:
        ax.set_xticks(np.arange(len(bins)) + 0.4 - width / 2, bins)
    ax.set_xlabel("over-correction magnitude")
    ax.set_ylabel("events")
    ax.set_title("Distribution of over-correction magnitudes")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_preferences(preferences: dict, path: Path) -> Path:
    overall = preferences["overall"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    labels = ["PINK", "BLEU", "Neither"]
    values = [overall[k] for k in labels]
    colors = ["#e75480", "#6baed6", "#cccccc"]
    if sum(values):
        ax1.pie(values, labels=[f"{k} {v:.1f}%" for k, v in zip(labels, values)],
                colors=colors, startangle=90)
    ax1.set_title("Blind preference, overall")

    brackets = preferences.get("brackets", [])
    if brackets:
        xs = np.arange(len(brackets))
        for i, key in enumerate(labels):
            ax2.bar(xs + (i - 1) * 0.28,
                    [b["percentages"][key] for b in brackets],
                    width=0.28, label=key, color=colors[i])
        ax2.set_xticks(xs, [f"Q{i + 1}\n(n={b['n']})" for i, b in enumerate(brackets)],
                       fontsize=8)
        ax2.set_ylabel("preference (%)")
        ax2.legend(fontsize=8)
    ax2.set_title("Preference by score bracket")
    return _save(fig, path)


def fig_mitigation(mitigation: dict, path: Path) -> Path:
    rows = mitigation["rows"]
    models = [r["model_id"] for r in rows]
    xs = np.arange(len(models))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(xs - 0.2, [r["pink_original"] for r in rows], width=0.38, label="standard")
    ax1.bar(xs + 0.2, [r["pink_mitigated"] for r in rows], width=0.38, label="mitigated")
    ax1.set_xticks(xs, models, rotation=20, fontsize=8)
    ax1.set_ylabel("PINK")
    ax1.set_title("Mitigated OCR prompt: score impact")
    ax1.legend(fontsize=8)
    ax2.bar(xs - 0.2, [r["oc_original_pct"] for r in rows], width=0.38, label="standard")
    ax2.bar(xs + 0.2, [r["oc_mitigated_pct"] for r in rows], width=0.38, label="mitigated")
    ax2.set_xticks(xs, models, rotation=20, fontsize=8)
    ax2.set_ylabel("OC rate (%)")
    ax2.set_title("Mitigated OCR prompt: over-correction impact")
    ax2.legend(fontsize=8)
    return _save(fig, path)
