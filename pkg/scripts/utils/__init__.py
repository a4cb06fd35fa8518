# Utility modules: errors, configuration, CSV/JSON export, terminal output
