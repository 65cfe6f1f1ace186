#pragma once

// JSON and CSV plumbing for job specs and artifacts. Complex numbers are [re, im]
// pairs; points are lists of them; coefficient vectors follow the graded-lex order.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pberg/isometry.hpp"
#include "pberg/variation.hpp"

namespace pberg::io {

using Json = nlohmann::ordered_json;

/// Member lookup that raises ValidationError naming the missing key.
const Json& require(const Json& j, const std::string& key, const std::string& where);
double number(const Json& j, const std::string& key, const std::string& where);
double number_or(const Json& j, const std::string& key, double fallback, const std::string& where);
int integer_or(const Json& j, const std::string& key, int fallback, const std::string& where);

Complex complex_from(const Json& j, const std::string& where);
Json to_json(Complex c);
Point point_from(const Json& j, const std::string& where);
Json to_json(const Point& z);

/// disk, unit_disk, ball, ellipse, polydisk, annulus, hartogs_fiber.
Domain domain_from(const Json& j);
Json to_json(const Domain& d);

/// zero, abs2 (|z|^2), re_z1 (Re z_1).
Weight weight_from(const Json& j);

HoloFunction holo_from(const Json& j);
Json to_json(const HoloFunction& f);

IsometryOperator operator_from(const Json& j);
Json to_json(const IsometryOperator& op);
Json to_json(const RationalMap& f);

/// identity, scaling, mobius, unitary.
Biholomorphism map_from(const Json& j, int dim);

DomainFamily family_from(const Json& j);
Json describe(const DomainFamily& f);

/// Shortest decimal text that reads back to the same double; "inf", "-inf", "nan" otherwise.
std::string format_number(double x);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// CSV with a header row and '\n' line ends; values are preformatted cells.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace pberg::io
