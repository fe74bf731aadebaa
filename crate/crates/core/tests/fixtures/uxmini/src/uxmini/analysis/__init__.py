"""Post-run analysis."""
