#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mw {

inline constexpr double pi = std::numbers::pi;

/// CODATA-2010 values. The single authoritative table; other headers read these.
struct PhysicalConstants {
    double c = 299792458.0;
    double h = 6.62606957e-34;
    double hbar = 6.62606957e-34 / (2.0 * std::numbers::pi);
    double G = 6.67384e-11;
    double eps0 = 8.854187817e-12;
    double a0 = 0.52917721092e-10;
    double kB = 1.3806488e-23;
    double Rinf = 10973731.568539;
    double amu = 1.660538921e-27;
    double Ar_e = 5.4857990946e-4;
    double e = 1.602176565e-19;
    double GeV = 1.602176565e-10;  // J
};

inline constexpr PhysicalConstants codata2010{};
inline const PhysicalConstants& constants() { return codata2010; }

struct Composition {
    int electrons = 0;
    int protons = 0;
    int neutrons = 0;
};

struct Species {
    std::string name;
    double mass = 0.0;            // kg
    double relative_mass = 0.0;   // A_r
    double charge = 0.0;          // C
    Composition composition;
    std::optional<double> polarizability;  // C m^2 / V

    void validate() const {
        if (!(mass > 0.0)) throw std::invalid_argument("species '" + name + "': mass must be positive");
        if (composition.electrons < 0 || composition.protons < 0 || composition.neutrons < 0)
            throw std::invalid_argument("species '" + name + "': negative composition");
        if (charge == 0.0 && composition.electrons != composition.protons)
            throw std::invalid_argument("species '" + name + "': neutral species needs N^e = N^p");
    }
};

inline Species make_species(std::string name, double Ar, double charge, Composition comp,
                            std::optional<double> pol = std::nullopt) {
    Species s{std::move(name), Ar * codata2010.amu, Ar, charge, comp, pol};
    s.validate();
    return s;
}

/// Hydrogen ground-state dc polarizability (9/2) 4 pi eps0 a0^3.
inline double hydrogen_polarizability() {
    const auto& k = codata2010;
    return 4.5 * 4.0 * pi * k.eps0 * k.a0 * k.a0 * k.a0;
}

namespace detail {
// Unweighted arithmetic mean used for the alpha evaluation.
inline constexpr double Ar_Cs133 = 132.905451947;
}

inline std::map<std::string, Species> builtin_species() {
    const double e = codata2010.e;
    std::map<std::string, Species> r;
    auto add = [&](Species s) { r.emplace(s.name, std::move(s)); };
    add(make_species("electron", codata2010.Ar_e, -e, {1, 0, 0}));
    add(make_species("positron", codata2010.Ar_e, +e, {1, 0, 0}));
    add(make_species("proton", 1.007276466812, +e, {0, 1, 0}));
    add(make_species("neutron", 1.00866491600, 0.0, {0, 0, 1}));
    add(make_species("H", 1.00782503207, 0.0, {1, 1, 0}, hydrogen_polarizability()));
    add(make_species("Li7", 7.01600455, 0.0, {3, 3, 4}));
    add(make_species("K40", 39.96399848, 0.0, {19, 19, 21}));
    add(make_species("K41", 40.96182576, 0.0, {19, 19, 22}));
    add(make_species("Rb87", 86.909180527, 0.0, {37, 37, 50}));
    add(make_species("Cs133", detail::Ar_Cs133, 0.0, {55, 55, 78}));
    add(make_species("Fe56", 55.9349375, 0.0, {26, 26, 30}));
    add(make_species("Fe57", 56.9353940, 0.0, {26, 26, 31}));
    add(make_species("SiO2", 27.9769265325 + 2 * 15.99491461956, 0.0, {30, 30, 30}));
    return r;
}

class SpeciesRegistry {
public:
    SpeciesRegistry() : table_(builtin_species()) {}

    const Species& get(const std::string& name) const {
        auto it = table_.find(name);
        if (it == table_.end()) throw std::out_of_range("unknown species '" + name + "'");
        return it->second;
    }
    bool contains(const std::string& name) const { return table_.count(name) != 0; }
    void add(Species s) {
        s.validate();
        table_[s.name] = std::move(s);
    }
    std::vector<std::string> names() const {
        std::vector<std::string> v;
        for (auto& [k, _] : table_) v.push_back(k);
        return v;
    }

    /// Entries give either "relative_mass" or "mass_kg"; charge in units of e.
    void load_json(const nlohmann::json& doc) {
        for (const auto& e : doc.at("species")) {
            Species s;
            s.name = e.at("name").get<std::string>();
            if (e.contains("relative_mass")) {
                s.relative_mass = e["relative_mass"].get<double>();
                s.mass = s.relative_mass * codata2010.amu;
            } else {
                s.mass = e.at("mass_kg").get<double>();
                s.relative_mass = s.mass / codata2010.amu;
            }
            s.charge = e.value("charge_e", 0.0) * codata2010.e;
            auto c = e.value("composition", std::vector<int>{0, 0, 0});
            if (c.size() != 3) throw std::invalid_argument("composition needs 3 entries");
            s.composition = {c[0], c[1], c[2]};
            if (e.contains("polarizability")) s.polarizability = e["polarizability"].get<double>();
            add(std::move(s));
        }
    }
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open species file " + path);
        load_json(nlohmann::json::parse(in));
    }

private:
    std::map<std::string, Species> table_;
};

inline double compton_frequency(const Species& s) {
    if (!(s.mass > 0.0)) throw std::invalid_argument("compton_frequency: mass must be positive");
    const auto& k = codata2010;
    return s.mass * k.c * k.c / k.hbar;
}

inline double recoil_frequency(const Species& s, double wavenumber) {
    if (wavenumber < 0.0) throw std::invalid_argument("recoil_frequency: negative wavenumber");
    return codata2010.hbar * wavenumber * wavenumber / (2.0 * s.mass);
}

}  // namespace mw
