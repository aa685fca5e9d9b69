"""focklab 文档的 Sphinx 配置。"""

import os
import sys

# autodoc 需要从仓库根目录导入 focklab
sys.path.insert(0, os.path.abspath("../.."))

from focklab import __version__  # noqa: E402

project = "focklab"
copyright = "2026, focklab developers"
author = "focklab developers"
release = __version__
version = __version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "sphinx_autodoc_typehints",
    "sphinx_copybutton",
    "myst_parser",
]

# Markdown 扩展语法
myst_enable_extensions = ["colon_fence", "dollarmath", "deflist"]
source_suffix = {".rst": "restructuredtext", ".md": "markdown"}

language = "zh_CN"
html_theme = "furo"
html_title = f"focklab {__version__}"
html_theme_options = {
    "light_css_variables": {"color-brand-primary": "#0F766E", "color-brand-content": "#0F766E"},
    "dark_css_variables": {"color-brand-primary": "#5EEAD4", "color-brand-content": "#5EEAD4"},
    "navigation_with_keys": True,
}

autodoc_member_order = "bysource"
autodoc_default_options = {
    "members": True,
    "show-inheritance": True,
}
autodoc_typehints = "description"

napoleon_google_docstring = True
napoleon_numpy_docstring = False
