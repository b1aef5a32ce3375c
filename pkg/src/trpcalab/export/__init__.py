"""CSV and Excel output for experiment records."""
