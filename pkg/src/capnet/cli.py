"""Command-line entry point.

Subcommands: build-graph, synthesize, analyze, allocate, gen-data. Every
run is reproducible: randomness flows through explicit --seed flags, and
artifacts are written only to files named by flags (reports go to stdout).

Exit codes: 0 success/feasible, 2 usage error, 3 input or data error,
4 infeasible, 5 internal invariant violation.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import deltas as deltas_mod
from . import network, profiles, stats, synthesis, taxonomy
from .cover import DEFAULT_P_HAT_MAX, DEFAULT_P_MAX
from .errors import (
    AnnotationError,
    CapnetError,
    ConfigError,
    DatasetError,
    IncompleteProfileError,
    InfeasibleCoverError,
)
from .synthesis import DEFAULT_N_MIN

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INFEASIBLE = 4
EXIT_INTERNAL = 5


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_catalog(path):
    if path is None:
        return taxonomy.load_default_catalog()
    return taxonomy.load_catalog(path)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


@click.group()
def main():
    """Conjugated-capability network toolkit."""


@main.command("build-graph")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None, help="Capability catalog CSV (default: packaged).")
@click.option("--interrelations", "table_path", type=click.Path(), default=None, help="Interrelation table CSV (default: packaged).")
@click.option("--candidates", "cand_path", type=click.Path(), default=None, help="Strong-candidate table CSV (default: packaged).")
@click.option("--correlations", "corr_path", type=click.Path(), default=None, help="Pairwise correlation CSV (default: packaged reference values).")
@click.option("--threshold", type=float, default=0.4, show_default=True, help="Prune edges with |r| below this.")
@click.option("--repair/--no-repair", default=True, show_default=True, help="Add the moderate reachability-repair pair.")
@click.option("--out-graph", type=click.Path(), default=None, help="Write the structured graph document here.")
@click.option("--out-dot", type=click.Path(), default=None, help="Write the dot rendering here.")
def cmd_build_graph(catalog_path, table_path, cand_path, corr_path, threshold, repair, out_graph, out_dot):
    """Build, prune, and augment the conjugated-capability graph."""
    try:
        catalog = _load_catalog(catalog_path)
        table = network.load_interrelations(table_path) if table_path else network.load_default_interrelations()
        candidates = network.load_candidates(cand_path) if cand_path else network.load_default_candidates()
        correlations = network.load_correlations(corr_path) if corr_path else network.load_default_correlations()
    except (OSError, CapnetError) as exc:
        _fail(EXIT_DATA, str(exc))

    try:
        built = network.build_graph(table, catalog)
        pruned = network.prune_weak(built, correlations, threshold)
        final = network.augment_strong(pruned, candidates, repair=repair)
    except CapnetError as exc:
        _fail(EXIT_DATA, str(exc))

    if out_graph:
        _write(Path(out_graph), network.export_graph(final, "structured"))
    if out_dot:
        _write(Path(out_dot), network.export_graph(final, "dot", catalog=catalog))
    removed = sorted(
        tuple(str(x) for x in sorted(pair)) for pair in built.edge_pairs() - pruned.edge_pairs()
    )
    added = sorted(
        tuple(str(x) for x in sorted(pair)) for pair in final.edge_pairs() - pruned.edge_pairs()
    )
    click.echo(f"nodes: {len(final.nodes)}")
    click.echo(f"edges: {len(final.edges)}")
    click.echo(f"{len(removed)} edges pruned, {len(added)} edges added")
    for a, b in removed:
        click.echo(f"  pruned {a} -- {b}")
    for a, b in added:
        click.echo(f"  added {a} -- {b}")
    if built.dropped_edges:
        click.echo(f"{len(built.dropped_edges)} symmetric edges dropped to keep the graph acyclic")
        for edge in built.dropped_edges:
            click.echo(f"  dropped {edge.source} -> {edge.target}")


@main.command("synthesize")
@click.option("--graph", "graph_path", type=click.Path(), required=True, help="Structured graph document from build-graph.")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
@click.option("--n-min", type=int, default=DEFAULT_N_MIN, show_default=True, help="Minimum nodes per movement sequence.")
@click.option("--p-max", type=int, default=DEFAULT_P_MAX, show_default=True, help="Minimum visits per node.")
@click.option("--p-hat-max", type=int, default=DEFAULT_P_HAT_MAX, show_default=True, help="Maximum visits per node.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the sequence table CSV here.")
@click.option("--out-text", type=click.Path(), default=None, help="Write the shaded text rendering here.")
def cmd_synthesize(graph_path, catalog_path, n_min, p_max, p_hat_max, out_path, out_text):
    """Synthesize the minimal movement-sequence test plan."""
    try:
        catalog = _load_catalog(catalog_path)
        graph = network.import_graph(Path(graph_path).read_text(encoding="utf-8"))
    except (OSError, CapnetError) as exc:
        _fail(EXIT_DATA, str(exc))
    node_set = [n for n in taxonomy.sitting_over_table_set(catalog) if n in set(graph.nodes)]
    try:
        result = synthesis.synthesize(graph, node_set, n_min=n_min, p_max=p_max, p_hat_max=p_hat_max)
    except InfeasibleCoverError as exc:
        _fail(EXIT_INFEASIBLE, str(exc))
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))
    except AnnotationError as exc:
        _fail(EXIT_INTERNAL, str(exc))

    if out_path:
        _write(Path(out_path), synthesis.sequences_to_csv(result.sequences))
    if out_text:
        _write(Path(out_text), synthesis.sequences_to_text(result.sequences))
    click.echo(f"candidate paths: {len(result.path_set)}")
    click.echo(f"selected sequences: {result.solution.objective}")
    click.echo("visits per node:")
    for node, count in sorted(result.solution.visit_counts.items()):
        click.echo(f"  {node}: {count}")
    for warning in result.warnings:
        click.echo(f"warning: {warning}")


@main.command("analyze")
@click.option("--data", "data_path", type=click.Path(), required=True, help="Profile dataset CSV.")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
@click.option("--phase", type=click.Choice(["pre_rehab", "post_rehab", "all"]), default="post_rehab", show_default=True)
@click.option("--threshold", type=float, default=0.2, show_default=True, help="Dispersion filter threshold.")
@click.option("--resamples", type=int, default=10_000, show_default=True, help="Monte Carlo resamples per pair.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-corr", type=click.Path(), default=None, help="Write the correlation matrix CSV here.")
@click.option("--out-pvalues", type=click.Path(), default=None, help="Write the permutation p-value table here.")
def cmd_analyze(data_path, catalog_path, phase, threshold, resamples, seed, out_corr, out_pvalues):
    """Filter a dataset, compute correlations and permutation p-values."""
    try:
        catalog = _load_catalog(catalog_path)
        dataset = profiles.load_dataset(data_path, catalog)
    except (OSError, CapnetError) as exc:
        _fail(EXIT_DATA, str(exc))
    if phase != "all":
        dataset = dataset.with_phase(profiles.Phase(phase))
    evaluation_set = taxonomy.sitting_over_table_set(catalog)
    try:
        kept = profiles.filter_profiles(dataset, evaluation_set, threshold)
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))
    click.echo(f"retained {len(kept)} of {len(dataset)} profiles")
    if len(kept) < 2:
        _fail(EXIT_DATA, "fewer than 2 profiles survive the completeness/dispersion filter")
    try:
        matrix = stats.correlation_matrix(kept, evaluation_set)
    except CapnetError as exc:
        _fail(EXIT_DATA, str(exc))
    if matrix.undefined_ids():
        names = ", ".join(str(c) for c in matrix.undefined_ids())
        click.echo(f"undefined (constant) columns: {names}")
    if out_corr:
        _write(Path(out_corr), matrix.to_csv())
    if out_pvalues:
        pvalues = stats.pairwise_permutation_pvalues(kept, evaluation_set, resamples, seed)
        _write(Path(out_pvalues), pvalues.to_csv())


@main.command("allocate")
@click.option("--requirements", "req_path", type=click.Path(), required=True, help="Requirement CSV with columns id,level.")
@click.option("--profiles", "data_path", type=click.Path(), required=True, help="Profile dataset CSV.")
@click.option("--agent", required=True, help="Agent id to allocate for.")
@click.option("--phase", type=click.Choice(["pre_rehab", "post_rehab", "unspecified"]), default=None, help="Phase of the agent's profile (default: only row for the agent).")
@click.option("--graph", "graph_path", type=click.Path(), required=True, help="Structured graph document.")
@click.option("--xi", "xi_items", multiple=True, help="Per-capability slack, e.g. --xi 3.03.04=1 (repeatable).")
@click.option("--theta", type=int, default=0, show_default=True, help="Aggregate deficit slack.")
@click.option("--out-trace", type=click.Path(), default=None, help="Write the machine-readable trace document here.")
def cmd_allocate(req_path, data_path, agent, phase, graph_path, xi_items, theta, out_trace):
    """Judge an agent against an action, compensating deltas if needed."""
    try:
        catalog = taxonomy.load_default_catalog()
        graph = network.import_graph(Path(graph_path).read_text(encoding="utf-8"))
        dataset = profiles.load_dataset(data_path, catalog)
        requirements = _read_requirements(req_path)
        xi = {}
        for item in xi_items:
            key, _, value = item.partition("=")
            xi[taxonomy.parse_capability_id(key)] = int(value)
        fuzz = deltas_mod.FuzzyParams(xi=xi, theta=theta)
        profile = dataset.select(agent, profiles.Phase(phase) if phase else None)
        profile = profiles.propagate_main_level(profile)
    except (OSError, ValueError, CapnetError) as exc:
        _fail(EXIT_DATA, str(exc))

    try:
        trace = deltas_mod.compensate(requirements, profile, graph, fuzz)
    except IncompleteProfileError as exc:
        _fail(EXIT_DATA, str(exc))
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))

    click.echo(trace.text_report(), nl=False)
    if out_trace:
        _write(Path(out_trace), trace.to_document())
    if trace.outcome is deltas_mod.CompensationOutcome.INFEASIBLE:
        sys.exit(EXIT_INFEASIBLE)


@main.command("gen-data")
@click.option("--count", type=int, default=500, show_default=True, help="Number of agents; each emits a pre/post pair.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--correlation", type=float, default=0.8, show_default=True, help="Within-main-capability correlation strength.")
@click.option("--degenerate-fraction", type=float, default=0.15, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True, help="Write the dataset CSV here.")
def cmd_gen_data(count, seed, correlation, degenerate_fraction, out_path):
    """Generate a deterministic synthetic profile dataset."""
    catalog = taxonomy.load_default_catalog()
    ids = tuple(taxonomy.sitting_over_table_set(catalog))
    try:
        config = profiles.GeneratorConfig(
            ids=ids,
            agents=count,
            within_main_correlation=correlation,
            degenerate_fraction=degenerate_fraction,
        )
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))
    dataset = profiles.generate_synthetic_profiles(config, seed)
    _write(Path(out_path), profiles.write_dataset(dataset, ids))
    click.echo(f"wrote {len(dataset)} profiles for {count} agents")


def _read_requirements(path) -> "profiles.RequirementSet":
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as handle:
        reader = _csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != ("id", "level"):
            raise DatasetError("requirement file header must be id,level")
        values = {
            taxonomy.parse_capability_id(row["id"]): int(row["level"]) for row in reader
        }
    return profiles.RequirementSet(action_id=str(path), requirements=values)


if __name__ == "__main__":
    main()
