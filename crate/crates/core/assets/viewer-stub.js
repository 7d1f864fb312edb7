// Placeholder for the report viewer bundle. Markers keep their explanation
// in the title attribute, so the page stays usable without the bundle.
document.documentElement.setAttribute("data-viewer", "stub");
