#include "hkflow/constants_ledger.hpp"

// Ledger arithmetic is header-inline; this TU anchors the module.
