"""Fixed figure styling so regenerated figures stay comparable across runs."""

STYLE = {
    "dpi": 130,
    "cmap": "viridis",
    "contour_levels": 12,
    "contour_color": "k",
    "contour_lw": 0.4,
    "resolution_colors": ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"],
    # gauge-overlay line convention: baseline solid, hydrophone dashed,
    # vapor-pressure line thick dashed
    "baseline_style": {"color": "k", "linestyle": "solid", "linewidth": 1.2},
    "hydrophone_style": {"color": "#d62728", "linestyle": "dashed", "linewidth": 1.2},
    "vapor_style": {"color": "0.3", "linestyle": "dashed", "linewidth": 2.6},
    "axis_trace_style": {"color": "#1f77b4", "linewidth": 1.0},
}

LINE_CONVENTION = {
    "baseline": "solid",
    "hydrophone": "dashed",
    "vapor": "thick-dashed",
}
