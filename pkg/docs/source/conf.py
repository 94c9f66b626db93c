# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information

project = "EUR Bounds"
copyright = "2026, EUR Bounds developers"
author = "EUR Bounds developers"
release = "0.1.0"

# -- General configuration ---------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
]

templates_path = ["_templates"]
exclude_patterns = []

language = "en"

# -- Options for HTML output -------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output

extensions.append("sphinx_wagtail_theme")
html_theme = "sphinx_wagtail_theme"
html_theme_options = dict(
    project_name="EUR Bounds",
    logo="",
    logo_alt="",
    logo_height=50,
    logo_url="/",
    logo_width=50,
)

html_static_path = ["_static"]

# set up Django environment
import os
import sys
import django

sys.path.insert(0, os.path.abspath("../../eur_bounds_backend"))
os.environ["DJANGO_SETTINGS_MODULE"] = "eur_bounds_backend.settings"
django.setup()
