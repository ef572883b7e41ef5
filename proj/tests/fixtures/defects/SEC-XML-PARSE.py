"""Feed reader."""
import xml.etree.ElementTree as ET

__all__ = ["parse_feed"]


def parse_feed(text: str) -> object:
    """Root element of a feed."""
    return ET.fromstring(text)
