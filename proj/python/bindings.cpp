#include <pybind11/pybind11.h>
PYBIND11_MODULE(_imfrac, m) { m.doc() = "radar interference mitigation core"; }
