"""Font metrics for bbox derivation, backed by the standard-14 AFM tables."""

from __future__ import annotations

from reportlab.pdfbase.pdfmetrics import getFont, stringWidth

# Conservative defaults for fonts we have no metrics for (embedded subsets).
FALLBACK_CHAR_WIDTH = 0.5  # em
FALLBACK_ASCENT = 718      # per mille
FALLBACK_DESCENT = -207

STANDARD_14 = frozenset({
    "Helvetica", "Helvetica-Bold", "Helvetica-Oblique", "Helvetica-BoldOblique",
    "Times-Roman", "Times-Bold", "Times-Italic", "Times-BoldItalic",
    "Courier", "Courier-Bold", "Courier-Oblique", "Courier-BoldOblique",
    "Symbol", "ZapfDingbats",
})


def normalize_font_name(name: str) -> str:
    """Strip a subset prefix like 'ABCDEF+' and return the base font name."""
    if len(name) > 7 and name[6] == "+" and name[:6].isalpha() and name[:6].isupper():
        return name[7:]
    return name


def has_metrics(name: str) -> bool:
    return normalize_font_name(name) in STANDARD_14


def text_width(text: str, font_name: str, size: float) -> float:
    base = normalize_font_name(font_name)
    if base in STANDARD_14:
        try:
            return stringWidth(text, base, size)
        except KeyError:
            pass
    return FALLBACK_CHAR_WIDTH * size * len(text)


def vertical_extent(font_name: str, size: float) -> tuple[float, float]:
    """(descent, ascent) in points; descent is negative."""
    base = normalize_font_name(font_name)
    if base in STANDARD_14:
        try:
            face = getFont(base).face
            return face.descent * size / 1000.0, face.ascent * size / 1000.0
        except KeyError:
            pass
    return FALLBACK_DESCENT * size / 1000.0, FALLBACK_ASCENT * size / 1000.0


def style_flags(font_name: str) -> tuple[bool, bool]:
    """(bold, italic) inferred from the font name."""
    lowered = normalize_font_name(font_name).lower()
    bold = "bold" in lowered or lowered.endswith("-black")
    italic = "italic" in lowered or "oblique" in lowered
    return bold, italic


def pick_standard_font(bold: bool, italic: bool) -> str:
    return {
        (False, False): "Helvetica",
        (True, False): "Helvetica-Bold",
        (False, True): "Helvetica-Oblique",
        (True, True): "Helvetica-BoldOblique",
    }[(bold, italic)]
