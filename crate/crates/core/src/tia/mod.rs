//! The four amplifier designs, their gain-derivation check, area and report.

mod area;
mod derivation;
mod designs;
mod report;

pub use area::{area_estimate, mosfet_area, MEMRISTOR_AREA_UM2};
pub use derivation::{derivation_check, DerivationReport};
pub use designs::{
    build_design, build_design_with, design_netlist, resolve_builtin, DesignOptions, DesignVariant,
    BIAS_RESISTANCE, SUPPLY_V,
};
pub use report::{
    compare_designs, comparison_csv, design_report, metrics_json, reference_row, ComparisonRow, ReferenceRow,
    ReportOptions, COMPARISON_HEADER, REFERENCE_LABEL,
};
