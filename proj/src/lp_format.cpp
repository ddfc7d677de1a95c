#include "h2bid/lp_format.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace h2bid {

namespace {

// Appends terms, wrapping lines well below the 510-character limit some
// readers enforce.
class TermWriter {
public:
    explicit TermWriter(std::ostream& out, std::size_t width) : out_(out), width_(width) {}

    void add(double coef, const std::string& name) {
        if (coef == 0.0) return;
        std::ostringstream term;
        term << std::setprecision(17);
        term << (coef < 0 ? "- " : (first_ ? "" : "+ "));
        if (std::abs(coef) != 1.0) term << std::abs(coef) << ' ';
        term << name;
        put(term.str());
        first_ = false;
    }
    void put(const std::string& text) {
        if (column_ + text.size() + 1 > width_) {
            out_ << "\n   ";
            column_ = 3;
        }
        out_ << ' ' << text;
        column_ += text.size() + 1;
    }
    bool empty() const { return first_; }

private:
    std::ostream& out_;
    std::size_t width_;
    std::size_t column_ = 0;
    bool first_ = true;
};

}  // namespace

void write_lp(std::ostream& out, const MilpModel& model) {
    const auto old_precision = out.precision(17);
    out << "Maximize\n obj:";
    {
        TermWriter w(out, 200);
        for (int j = 0; j < model.num_vars(); ++j) w.add(model.objective[j], model.names[j]);
        if (w.empty()) w.put("0 " + model.names.front());
    }
    out << "\nSubject To\n";
    RowFamily family = RowFamily::Count_;
    for (int r = 0; r < model.num_rows(); ++r) {
        const LinearRow& row = model.rows[r];
        if (row.family != family) {
            family = row.family;
            out << "\\ " << to_string(family) << '\n';
        }
        out << " r" << r << ':';
        TermWriter w(out, 200);
        for (const Term& t : row.terms) w.add(t.coef, model.names[t.col]);
        if (w.empty()) w.put("0 " + model.names.front());
        const char* op = row.relation == Relation::LessEqual ? "<=" : row.relation == Relation::Equal ? "=" : ">=";
        std::ostringstream tail;
        tail << std::setprecision(17) << op << ' ' << row.rhs;
        w.put(tail.str());
        out << '\n';
    }
    out << "Bounds\n";
    for (int j = 0; j < model.num_vars(); ++j) {
        const double lo = model.lower[j];
        const double hi = model.upper[j];
        const std::string& n = model.names[j];
        if (lo == hi) out << ' ' << n << " = " << lo << '\n';
        else if (std::isinf(lo) && std::isinf(hi)) out << ' ' << n << " free\n";
        else {
            out << ' ';
            if (std::isinf(lo)) out << "-inf";
            else out << lo;
            out << " <= " << n << " <= ";
            if (std::isinf(hi)) out << "+inf";
            else out << hi;
            out << '\n';
        }
    }
    bool any_binary = false;
    for (int j = 0; j < model.num_vars(); ++j) {
        if (!model.binary[j]) continue;
        if (!any_binary) out << "Binaries\n";
        any_binary = true;
        out << ' ' << model.names[j] << '\n';
    }
    out << "End\n";
    out.precision(old_precision);
}

}  // namespace h2bid
