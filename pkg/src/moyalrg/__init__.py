"""Ribbon graphs, multiscale power counting and amplitude scans for the
quartic Moyal model with an oscillator-free 1/p^2 propagator term."""
from __future__ import annotations

from .amplitude import (AmplitudeSample, CutoffSpec, MonteCarloError, bubble_regular,
                        fourpoint_gaussian_oracle, fourpoint_irregular, schwinger_mc,
                        schwinger_propagator, tadpole_nonplanar, tadpole_planar)
from .catalog import catalog_get, catalog_names
from .graph import (Edge, External, GraphError, GraphSyntaxError, RibbonGraph, Vertex,
                    canonical_form, parse_graph, serialize_graph, validate)
from .multiscale import (DomainError, ModelParams, ScaleAttribution, high_subgraphs,
                         momentum_routing, parse_attribution, power_counting_bound, propagator,
                         slice_bound, slice_propagator)
from .renorm_fit import (ClassificationTable, FitError, FitResult, ScanSeries, finite_a_shift,
                         fit_ir_structure, fit_uv_divergence, reproduce_table)
from .rosette import (Rosette, SpanningTree, all_spanning_trees, contract_to_rosette,
                      intersection_matrix, moyal_phase, spanning_tree, total_phase)
from .topology import (DivergenceClass, GraphClass, TopologyReport, divergence_class,
                       topology_report, trace_faces)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeSample", "ClassificationTable", "CutoffSpec", "DivergenceClass", "DomainError",
    "Edge", "External", "FitError", "FitResult", "GraphClass", "GraphError", "GraphSyntaxError",
    "ModelParams", "MonteCarloError", "RibbonGraph", "Rosette", "ScaleAttribution", "ScanSeries",
    "SpanningTree", "TopologyReport", "Vertex", "all_spanning_trees", "bubble_regular",
    "canonical_form", "catalog_get", "catalog_names", "contract_to_rosette", "divergence_class",
    "finite_a_shift", "fit_ir_structure", "fit_uv_divergence", "fourpoint_gaussian_oracle",
    "fourpoint_irregular", "high_subgraphs", "intersection_matrix", "momentum_routing",
    "moyal_phase", "parse_attribution", "parse_graph", "power_counting_bound", "propagator",
    "reproduce_table", "schwinger_mc", "schwinger_propagator", "serialize_graph", "slice_bound",
    "slice_propagator", "spanning_tree", "tadpole_nonplanar", "tadpole_planar",
    "topology_report", "total_phase", "trace_faces", "validate",
]
