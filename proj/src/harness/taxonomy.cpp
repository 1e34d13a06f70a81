#include "manetlab/harness/taxonomy.hpp"

#include <algorithm>
#include <array>

namespace manetlab::harness {

const char* to_string(Answer a)
{
    switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::Partial: return "partial";
    }
    return "?";
}

std::vector<TechnologyProfile> builtin_taxonomy()
{
    using A = Answer;
    return {
        {"802.11s", A::Yes, A::Yes, A::Yes, A::Yes, A::Partial},
        {"Open Garden", A::Yes, A::Partial, A::No, A::No, A::No},
        {"Serval", A::Yes, A::Yes, A::No, A::Yes, A::No},
        {"WiFi Direct", A::Yes, A::No, A::No, A::Yes, A::Yes},
        {"AdHocDroid", A::Yes, A::Yes, A::Yes, A::Yes, A::Partial},
    };
}

std::string taxonomy_csv(const std::vector<TechnologyProfile>& rows)
{
    std::string out =
        "technology,no_internet_needed,multi_hop,any_app,no_other_wireless,other_systems\n";
    for (const TechnologyProfile& r : rows) {
        out += r.name;
        for (Answer a : {r.no_internet_needed, r.multi_hop, r.any_app, r.no_other_wireless,
                         r.other_systems}) {
            out += ",";
            out += to_string(a);
        }
        out += "\n";
    }
    return out;
}

std::string taxonomy_table(const std::vector<TechnologyProfile>& rows)
{
    const char* headers[6] = {"technology", "no internet needed", "multi hop",
                              "any app",    "no other wireless",  "other systems"};
    std::vector<std::array<std::string, 6>> cells;
    for (const TechnologyProfile& r : rows)
        cells.push_back({r.name, to_string(r.no_internet_needed), to_string(r.multi_hop),
                         to_string(r.any_app), to_string(r.no_other_wireless),
                         to_string(r.other_systems)});

    std::size_t width[6];
    for (int c = 0; c < 6; ++c) {
        width[c] = std::string(headers[c]).size();
        for (const auto& row : cells)
            width[c] = std::max(width[c], row[c].size());
    }

    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size(), ' ');
    };
    std::string out;
    for (int c = 0; c < 6; ++c)
        out += pad(headers[c], width[c]) + (c == 5 ? "\n" : "  ");
    for (int c = 0; c < 6; ++c)
        out += std::string(width[c], '-') + (c == 5 ? "\n" : "  ");
    for (const auto& row : cells)
        for (int c = 0; c < 6; ++c)
            out += pad(row[c], width[c]) + (c == 5 ? "\n" : "  ");
    return out;
}

} // namespace manetlab::harness
