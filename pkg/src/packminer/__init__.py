"""Pack binary data into per-attribute decision trees and read off the itemsets they imply."""

__version__ = "0.1.0"
