from graph_radii.version import __version__
