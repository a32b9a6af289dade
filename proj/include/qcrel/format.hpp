#pragma once
// Output formatting helpers. CSV artifacts always use full precision
// (%.17g) so values round-trip bit-exactly; text reports round per the
// scenario's report settings.

#include <string>

namespace qcrel::fmt {

std::string g17(double v);                // shortest exact round-trip form
std::string fixed(double v, int digits);  // printf %.*f
// Writes bytes as-is (binary mode, LF endings preserved).
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace qcrel::fmt
