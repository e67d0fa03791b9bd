"""CSPC market simulator: crowdsourced price control for wireless access markets."""
