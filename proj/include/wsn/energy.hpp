#pragma once

// Energy model and per-mote battery. All bookkeeping is in integer
// nanojoules; reports convert to millijoules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace wsn {

using Nanojoules = std::int64_t;

inline Nanojoules mj_to_nj(double mj) { return static_cast<Nanojoules>(std::llround(mj * 1e6)); }
inline double nj_to_mj(Nanojoules nj) { return static_cast<double>(nj) / 1e6; }

struct AsymCosts {
  double sign_mj = 0;
  double verify_mj = 0;
  double kx_client_mj = 0;
  double kx_server_mj = 0;

  [[nodiscard]] double kx_total_mj() const { return kx_client_mj + kx_server_mj; }
};

struct CipherProfile {
  double clocks = 0;      // informational only; units unspecified in the source table
  double normalized = 0;  // relative speed, higher is faster
};

class EnergyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Symmetric cipher speeds (Clocks / Normalized value) from the NIST AES comparison.
inline std::map<std::string, CipherProfile> default_cipher_profiles() {
  return {
      {"MARS", {34.163, 0.28}},
      {"RC6", {32.731, 0.29}},
      {"RIJANDEL", {9.464, 1.00}},
      {"SERPENT", {126.074, 0.08}},
      {"TWOFISH", {26.500, 0.36}},
  };
}

/// Public-key operation costs in mJ (sign, verify, key-exchange client, server).
inline std::map<std::string, AsymCosts> default_asym_costs() {
  return {
      {"RSA1024", {304, 11.9, 15.4, 304}},
      {"ECC160", {22.82, 45.09, 22.3, 22.3}},
      {"RSA2048", {2302.7, 53.7, 57.2, 2302.7}},
      {"ECC224", {61.54, 121.98, 60.4, 60.4}},
  };
}

struct EnergyModel {
  int instructions_per_bit = 900;
  double energy_per_instruction_mj = 0.000005;
  double rx_factor = 0.5;
  std::string cipher = "RIJANDEL";
  std::int64_t base_cipher_instr = 10'000;
  std::int64_t hello_processing_instr = 2'000;
  double idle_mj_per_s = 0.1;
  std::map<std::string, CipherProfile> ciphers = default_cipher_profiles();
  std::map<std::string, AsymCosts> asym = default_asym_costs();

  void validate() const {
    if (instructions_per_bit < 800 || instructions_per_bit > 1000)
      throw EnergyError("instructions_per_bit must lie in [800, 1000]");
    if (!(energy_per_instruction_mj > 0)) throw EnergyError("energy_per_instruction_mj must be positive");
    if (!(rx_factor > 0)) throw EnergyError("rx_factor must be positive");
    if (base_cipher_instr <= 0) throw EnergyError("base_cipher_instr must be positive");
    if (hello_processing_instr <= 0) throw EnergyError("hello_processing_instr must be positive");
    if (idle_mj_per_s < 0) throw EnergyError("idle_mj_per_s must be non-negative");
    if (!ciphers.contains(cipher)) throw EnergyError("unknown cipher " + cipher);
    for (const auto& [name, c] : ciphers)
      if (!(c.normalized > 0)) throw EnergyError("cipher " + name + " needs a positive normalized value");
    for (const auto& [name, a] : asym)
      if (!(a.sign_mj > 0 && a.verify_mj > 0 && a.kx_client_mj > 0 && a.kx_server_mj > 0))
        throw EnergyError("asymmetric costs for " + name + " must be positive");
  }

  [[nodiscard]] Nanojoules instructions_cost(double instructions) const {
    return static_cast<Nanojoules>(std::llround(instructions * energy_per_instruction_mj * 1e6));
  }

  [[nodiscard]] Nanojoules tx_cost(std::int64_t bits) const {
    return instructions_cost(static_cast<double>(bits) * instructions_per_bit);
  }

  [[nodiscard]] Nanojoules rx_cost(std::int64_t bits) const {
    return static_cast<Nanojoules>(std::llround(static_cast<double>(tx_cost(bits)) * rx_factor));
  }

  [[nodiscard]] Nanojoules sym_block_cost(const std::string& cipher_name) const {
    const auto it = ciphers.find(cipher_name);
    if (it == ciphers.end()) throw EnergyError("UnknownAlgorithm: " + cipher_name);
    return instructions_cost(static_cast<double>(base_cipher_instr) / it->second.normalized);
  }

  [[nodiscard]] Nanojoules sym_block_cost() const { return sym_block_cost(cipher); }

  [[nodiscard]] const AsymCosts& asym_costs(const std::string& alg) const {
    const auto it = asym.find(alg);
    if (it == asym.end()) throw EnergyError("UnknownAlgorithm: " + alg);
    return it->second;
  }

  /// Idle drain over `ms` simulated milliseconds.
  [[nodiscard]] Nanojoules idle_cost(std::int64_t ms) const {
    return static_cast<Nanojoules>(std::llround(idle_mj_per_s * 1e3 * static_cast<double>(ms)));
  }
};

/// Remaining charge of one mote. A mote whose charge reaches zero is dead.
struct Battery {
  Nanojoules remaining = 0;
  Nanojoules spent = 0;

  [[nodiscard]] bool dead() const { return remaining <= 0; }

  /// Deducts up to `cost`, flooring at zero. Returns the amount deducted.
  Nanojoules draw(Nanojoules cost) {
    const Nanojoules taken = std::min(cost, std::max<Nanojoules>(remaining, 0));
    remaining -= taken;
    spent += taken;
    return taken;
  }
};

enum class RadioDirection { Tx, Rx };

inline Nanojoules charge_radio(const EnergyModel& model, Battery& battery, std::int64_t bits, RadioDirection dir) {
  const Nanojoules cost = dir == RadioDirection::Tx ? model.tx_cost(bits) : model.rx_cost(bits);
  return battery.draw(cost);
}

enum class CryptoOpKind { SymBlock, Mac, AsymSign, AsymVerify, KxClient, KxServer };

struct CryptoOp {
  CryptoOpKind kind = CryptoOpKind::SymBlock;
  std::string algorithm;  // cipher name for symmetric ops (empty = model default), preset name otherwise
};

[[nodiscard]] inline Nanojoules crypto_cost(const EnergyModel& model, const CryptoOp& op) {
  switch (op.kind) {
    case CryptoOpKind::SymBlock:
    case CryptoOpKind::Mac:
      return model.sym_block_cost(op.algorithm.empty() ? model.cipher : op.algorithm);
    case CryptoOpKind::AsymSign: return mj_to_nj(model.asym_costs(op.algorithm).sign_mj);
    case CryptoOpKind::AsymVerify: return mj_to_nj(model.asym_costs(op.algorithm).verify_mj);
    case CryptoOpKind::KxClient: return mj_to_nj(model.asym_costs(op.algorithm).kx_client_mj);
    case CryptoOpKind::KxServer: return mj_to_nj(model.asym_costs(op.algorithm).kx_server_mj);
  }
  return 0;
}

inline Nanojoules charge_crypto(const EnergyModel& model, Battery& battery, const CryptoOp& op) {
  return battery.draw(crypto_cost(model, op));
}

}  // namespace wsn
