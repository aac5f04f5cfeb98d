"""pdfremedy: remediate untagged PDFs into tagged documents and audit tag accuracy."""

__version__ = "0.1.0"
