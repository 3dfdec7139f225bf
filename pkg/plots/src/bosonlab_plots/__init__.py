"""Figure generation for bosonlab collision-ratio sweeps."""

from .aggregate import SchemaError, Series, SeriesPoint, aggregate, read_records, series_to_jsonable

__version__ = "0.1.0"
