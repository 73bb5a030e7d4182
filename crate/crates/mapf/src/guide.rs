//! Guide chapters compiled as doc-tests. (under construction)
