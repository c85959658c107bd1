#pragma once

struct PropertySummary {
  long cases = 0;
  int failed = 0;
  double seconds = 0.0;

  bool passed() const { return failed == 0 && cases >= 10000 && seconds < 60.0; }
};

/// Runs every property and prints one line per property.
PropertySummary run_properties();
