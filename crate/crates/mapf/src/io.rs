//! Instance ingestion and output formats. (under construction)
