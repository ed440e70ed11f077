"""NetFlow ingestion, preprocessing, graph construction, and synthesis."""

from .graph import FlowGraph, build_graph, dump_graph, load_graph
from .ingest import FlowRecord, ParseReport, parse_netflow_csv
from .prep import Standardizer, fit_standardizer, holdout_split, stratified_downsample
from .schema import FeatureSchema
from .synth import export_records_csv, synth_dataset, synth_schema

__all__ = [
    "FeatureSchema",
    "FlowGraph",
    "FlowRecord",
    "ParseReport",
    "Standardizer",
    "build_graph",
    "dump_graph",
    "export_records_csv",
    "fit_standardizer",
    "holdout_split",
    "load_graph",
    "parse_netflow_csv",
    "stratified_downsample",
    "synth_dataset",
    "synth_schema",
]
