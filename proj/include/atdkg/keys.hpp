// Long-term key material for one protocol node: PKE decryption, VRF
// sortition, and forward-secure signing keys.
#pragma once

#include "atdkg/ec.hpp"
#include "atdkg/fs_sig.hpp"
#include "atdkg/vrf.hpp"

namespace atdkg {

struct NodeKeys {
    Scalar dk;  // PKE decryption key
    Point ek;   // g^dk
    VrfKeyPair vrf;
    EpochSigKeys sig;
};

// Fresh keys with a forward-secure signing chain covering sig_rounds rounds.
NodeKeys node_keygen(Drbg& rng, int sig_rounds = 3);

}  // namespace atdkg
