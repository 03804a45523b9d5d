"""docflow: an unstructured-analytics engine.

Hierarchical documents become DocSets; natural-language questions become
validated, rewritable logical plans compiled onto a pipelined operator engine
over a hybrid keyword/vector/property store; every plan, intermediate result,
and lineage edge is exposed for verification.
"""

from docflow.engine import Context, DocSet
from docflow.model import Document, Element, parse_docparse_json

__version__ = "0.1.0"

__all__ = ["Context", "DocSet", "Document", "Element", "parse_docparse_json", "__version__"]
