//! Browser-facing wrappers; see www/index.html for the page that calls them.
