import glob
import importlib.util
import os
import sys

# Under ctest, test the module from the build tree rather than any installed copy.
_build = os.environ.get("MCC_PYTHON_DIR")
if _build:
    for name in [m for m in sys.modules if m == "mcc" or m.startswith("mcc.")]:
        del sys.modules[name]
    pkg = os.path.join(_build, "mcc")
    ext = importlib.util.spec_from_file_location("mcc._mcc", glob.glob(os.path.join(pkg, "_mcc*.so"))[0])
    sys.modules["mcc._mcc"] = importlib.util.module_from_spec(ext)
    ext.loader.exec_module(sys.modules["mcc._mcc"])
    spec = importlib.util.spec_from_file_location("mcc", os.path.join(pkg, "__init__.py"),
                                                  submodule_search_locations=[pkg])
    sys.modules["mcc"] = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(sys.modules["mcc"])
