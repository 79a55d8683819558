#include "aware/dot.hpp"

#include <sstream>

namespace aware {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

const char* kStyles[] = {"solid", "dashed", "dotted", "bold"};
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};

} // namespace

std::string to_dot(const AwarenessModel& m, bool agent_colors) {
    std::ostringstream out;
    out << "digraph awareness {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box, fontname=\"Helvetica\"];\n";

    for (const auto& s : m.states) {
        std::string label = escape(s);
        label += "\\ntrue:";
        bool any = false;
        for (const auto& p : m.lang(s)) {
            if (m.val(s, p)) {
                label += " " + escape(p);
                any = true;
            }
        }
        if (!any) label += " -";
        for (const auto& a : m.agents) {
            label += "\\nA(" + escape(a) + "):";
            const auto& aw = m.aware_set(a, s);
            if (aw.empty()) label += " -";
            for (const auto& p : aw) label += " " + escape(p);
        }
        out << "  \"" << escape(s) << "\" [label=\"" << label << "\"];\n";
    }

    for (size_t ai = 0; ai < m.agents.size(); ++ai) {
        const std::string& a = m.agents[ai];
        const char* style = kStyles[ai % 4];
        for (const auto& s : m.states) {
            for (const auto& t : m.acc(a, s)) {
                out << "  \"" << escape(s) << "\" -> \"" << escape(t) << "\" [style=" << style;
                if (agent_colors) out << ", color=\"" << kColors[ai % 6] << "\"";
                out << ", label=\"" << escape(a);
                Rational mass = m.pr(a, s, t);
                if (mass > 0) out << " " << format_rational(mass);
                out << "\"];\n";
            }
        }
    }

    out << "}\n";
    return out.str();
}

} // namespace aware
