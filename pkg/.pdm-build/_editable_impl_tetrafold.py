from editables.redirector import RedirectingFinder as F
F.install()
F.map_module('tetrafold', '/root/pkg/src/tetrafold/__init__.py')