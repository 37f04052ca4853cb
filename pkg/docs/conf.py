# Sphinx configuration for the percolated-gff documentation.
#
# Built by ``tox -e docs`` with warnings as errors.

import importlib.util
import os
import sys

sys.path.insert(0, os.path.abspath("../src"))

# -- Project information -----------------------------------------------------

project = "percolated-gff"
copyright = "2025, Håkon Hægland"
author = "Håkon Hægland"
release = "0.1"

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx_autodoc_typehints",
    "sphinx_click",
]
exclude_patterns = ["_build"]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
}

# NDArray aliases expand to long unions; keep signatures readable.
autodoc_type_aliases = {"NDArray": "numpy.typing.NDArray"}
typehints_use_signature_return = False
always_document_param_types = False

autodoc_default_options = {
    "member-order": "bysource",
    "members": True,
    "show-inheritance": True,
}

# -- Options for HTML output -------------------------------------------------

if importlib.util.find_spec("sphinx_rtd_theme") is not None:
    html_theme = "sphinx_rtd_theme"
else:
    html_theme = "default"
html_context = {
    "display_github": True,
    "github_user": "hakonhagland",
    "github_repo": "percolated-gff",
    "github_version": "main",
    "conf_py_path": "/docs/",
}
