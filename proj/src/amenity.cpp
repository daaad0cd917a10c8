#include "parkcast/amenity.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "parkcast/error.hpp"

namespace parkcast {

std::string_view to_string(Basis b) {
    return b == Basis::time_spent ? "time_spent" : "area";
}

Basis parse_basis(std::string_view s) {
    if (s == "time_spent") return Basis::time_spent;
    if (s == "area") return Basis::area;
    throw InputError("unknown basis '" + std::string(s) + "' (expected time_spent or area)");
}

CategoryScheme CategoryScheme::for_basis(Basis b) {
    if (b == Basis::time_spent) return {Basis::time_spent, 30.0, 90.0};
    return {Basis::area, 35.0, 100.0};
}

int categorize_amenity(double mean, const CategoryScheme& scheme) {
    if (mean <= scheme.upper1) return 1;
    if (mean <= scheme.upper2) return 2;
    return 3;
}

const AmenityStats* AmenityTable::find(std::string_view name) const {
    auto it = entries.find(name);
    return it == entries.end() ? nullptr : &it->second;
}

double AmenityTable::max_mean() const {
    double m = 0.0;
    for (const auto& [_, s] : entries) m = std::max(m, s.mean);
    return m;
}

double AmenityTable::max_stdev() const {
    double m = 0.0;
    for (const auto& [_, s] : entries) m = std::max(m, s.stdev);
    return m;
}

AmenityTable read_amenity_stats(std::istream& in, Basis basis) {
    detail::CsvReader reader(in);
    reader.expect_header({"amenity", "mean", "stdev", "category"});
    const auto scheme = CategoryScheme::for_basis(basis);
    AmenityTable table;
    table.basis = basis;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const auto where = "amenity stats line " + std::to_string(reader.line());
        if (row.size() != 4) throw InputError(where + ": expected 4 fields");
        AmenityStats s;
        s.amenity = row[0];
        if (s.amenity.empty()) throw InputError(where + ": empty amenity name");
        auto mean = detail::to_double(row[1]);
        auto stdev = detail::to_double(row[2]);
        auto cat = detail::to_int(row[3]);
        if (!mean || !stdev || !cat) throw InputError(where + ": unparseable number");
        s.mean = *mean;
        s.stdev = *stdev;
        s.category = static_cast<int>(*cat);
        if (s.mean <= 0) throw InputError(where + ": mean must be positive");
        if (s.stdev < 0) throw InputError(where + ": negative stdev");
        const int expected = categorize_amenity(s.mean, scheme);
        if (s.category != expected) {
            std::ostringstream msg;
            msg << where << ": category " << s.category << " inconsistent with mean " << s.mean
                << " (expected " << expected << ")";
            throw InputError(msg.str());
        }
        if (!table.entries.emplace(s.amenity, s).second) {
            throw InputError(where + ": duplicate amenity '" + s.amenity + "'");
        }
    }
    return table;
}

AmenityTable load_amenity_stats(const std::string& path, Basis basis) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open amenity stats file: " + path);
    return read_amenity_stats(in, basis);
}

void write_amenity_stats(std::ostream& out, const AmenityTable& table) {
    out << "amenity,mean,stdev,category\n";
    for (const auto& [name, s] : table.entries) {
        out << name << ',' << detail::format_number(s.mean) << ',' << detail::format_number(s.stdev)
            << ',' << s.category << '\n';
    }
}

}  // namespace parkcast
