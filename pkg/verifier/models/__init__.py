"""
Config and report models
"""
