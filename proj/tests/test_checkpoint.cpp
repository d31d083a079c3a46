#include <doctest.h>

#include <string>
#include <vector>

#include "atdkg/checkpoint.hpp"

using namespace atdkg;

namespace {

// Trusted-dealer stand-in for a key generation run: the full secret stays
// visible so tests can compare threshold results against plain arithmetic.
struct DealtKey {
    Scalar secret;
    Point pk;
    std::vector<Scalar> shares;
    std::vector<Point> pk_shares;
};

DealtKey deal_key(int m, int t, Drbg& rng) {
    DealtKey k;
    SharePolynomial f = sample_polynomial(t, rng);
    k.secret = f.eval(0);
    k.pk = pt_base_mul(k.secret);
    k.shares = share_evals(f, m);
    for (const auto& s : k.shares) k.pk_shares.push_back(pt_base_mul(s));
    return k;
}

Digest digest_of(const std::string& s) { return sha256(to_bytes(s)); }

SchnorrSig oracle_sign(const Scalar& x, const Point& pk, const Scalar& k, const Bytes& msg) {
    Point r = pt_base_mul(k);
    Scalar c = schnorr_challenge(r, pk, msg);
    return SchnorrSig{r, sc_add(k, sc_mul(c, x))};
}

CheckpointTx signed_tx(const Bytes& prev, const Point& q_next, const Digest& ckp,
                       const Scalar& x_prev, const Point& q_prev, Drbg& rng) {
    CheckpointTx tx;
    tx.input_ref = prev;
    tx.output_key = q_next;
    tx.op_return = ckp;
    tx.sig = oracle_sign(x_prev, q_prev, Scalar::random(rng), tx.body());
    return tx;
}

}  // namespace

TEST_CASE("checkpoint: transaction body encoding is canonical") {
    Drbg rng(to_bytes("checkpoint-test-body"));
    Point q = pt_base_mul(Scalar::random(rng));
    Digest ckp = digest_of("block-1");
    Bytes prev(32, 0xaa);

    Bytes body = build_tx_body(prev, q, ckp);
    CHECK(body.size() == 97);
    CHECK(build_tx_body(prev, q, ckp) == body);
    CHECK(Bytes(body.begin(), body.begin() + 32) == prev);
    CHECK(Bytes(body.begin() + 32, body.begin() + 65) == pt_compress(q));
    CHECK(Bytes(body.begin() + 65, body.end()) == digest_bytes(ckp));

    Bytes other = build_tx_body(prev, q, digest_of("block-2"));
    CHECK(other != body);

    CHECK_THROWS_AS(build_tx_body(Bytes(31, 0), q, ckp), std::invalid_argument);
    CHECK_THROWS_AS(build_tx_body(Bytes(33, 0), q, ckp), std::invalid_argument);
    CHECK_THROWS(build_tx_body(prev, Point::infinity(), ckp));
}

TEST_CASE("checkpoint: single signer matches plain schnorr") {
    Drbg rng(to_bytes("checkpoint-test-single"));
    DealtKey key = deal_key(1, 0, rng);
    DealtKey nonce = deal_key(1, 0, rng);
    Bytes msg = to_bytes("epoch transition message");

    // Degree-0 sharing: the lone share equals the secret.
    CHECK(key.shares[0] == key.secret);

    PartialSig p = partial_sign(1, nonce.shares[0], nonce.pk, key.shares[0], key.pk, msg);
    Scalar c = schnorr_challenge(nonce.pk, key.pk, msg);
    CHECK(verify_partial(p, nonce.pk_shares[0], key.pk_shares[0], c));

    SchnorrSig sig = combine_partials(0, {p});
    CHECK(pt_equal(sig.r, nonce.pk));
    CHECK(sig.z == sc_add(nonce.secret, sc_mul(c, key.secret)));
    CHECK(schnorr_verify(key.pk, msg, sig));

    SchnorrSig bad = sig;
    bad.z = sc_add(bad.z, Scalar::one());
    CHECK(!schnorr_verify(key.pk, msg, bad));
    CHECK(!schnorr_verify(key.pk, to_bytes("different message"), sig));
    CHECK(!schnorr_verify(nonce.pk, msg, sig));
    CHECK(!schnorr_verify(key.pk, msg, SchnorrSig{Point::infinity(), sig.z}));
}

TEST_CASE("checkpoint: partial signature verification") {
    Drbg rng(to_bytes("checkpoint-test-partials"));
    const int m = 5, t = 2;
    DealtKey key = deal_key(m, t, rng);
    DealtKey nonce = deal_key(m, t, rng);
    Bytes msg = to_bytes("partial verification message");
    Scalar c = schnorr_challenge(nonce.pk, key.pk, msg);

    for (int i = 0; i < m; ++i) {
        PartialSig p = partial_sign(uint32_t(i + 1), nonce.shares[i], nonce.pk, key.shares[i],
                                    key.pk, msg);
        CHECK(verify_partial(p, nonce.pk_shares[i], key.pk_shares[i], c));

        PartialSig bad = p;
        bad.z = sc_add(bad.z, Scalar::one());
        CHECK(!verify_partial(bad, nonce.pk_shares[i], key.pk_shares[i], c));
        CHECK(!verify_partial(p, nonce.pk_shares[i], key.pk_shares[(i + 1) % m], c));
        CHECK(!verify_partial(p, nonce.pk_shares[(i + 1) % m], key.pk_shares[i], c));
        PartialSig anon = p;
        anon.signer = 0;
        CHECK(!verify_partial(anon, nonce.pk_shares[i], key.pk_shares[i], c));
    }
}

TEST_CASE("checkpoint: any large-enough subset combines to the same signature") {
    Drbg rng(to_bytes("checkpoint-test-subsets"));
    const int m = 5, t = 2;
    DealtKey key = deal_key(m, t, rng);
    DealtKey nonce = deal_key(m, t, rng);
    Bytes msg = to_bytes("subset independence message");
    Scalar c = schnorr_challenge(nonce.pk, key.pk, msg);

    std::vector<PartialSig> all;
    for (int i = 0; i < m; ++i)
        all.push_back(partial_sign(uint32_t(i + 1), nonce.shares[i], nonce.pk, key.shares[i],
                                   key.pk, msg));

    // Reference signature from the undivided secrets.
    Scalar z_ref = sc_add(nonce.secret, sc_mul(c, key.secret));

    int swept = 0;
    for (uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) < t + 1) continue;
        std::vector<PartialSig> subset;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) subset.push_back(all[i]);
        SchnorrSig sig = combine_partials(t, subset);
        CHECK(pt_equal(sig.r, nonce.pk));
        CHECK(sig.z == z_ref);
        CHECK(schnorr_verify(key.pk, msg, sig));
        ++swept;
    }
    CHECK(swept == 16);  // all subsets of size 3, 4, 5

    SUBCASE("a tampered partial fails verification and is dropped before combining") {
        PartialSig forged = all[4];
        forged.z = sc_add(forged.z, Scalar::one());
        CHECK(!verify_partial(forged, nonce.pk_shares[4], key.pk_shares[4], c));
        std::vector<PartialSig> rest(all.begin(), all.begin() + 4);
        SchnorrSig sig = combine_partials(t, rest);
        CHECK(sig.z == z_ref);
        CHECK(schnorr_verify(key.pk, msg, sig));
    }
    SUBCASE("combining rejects short, duplicated, or inconsistent inputs") {
        CHECK_THROWS_AS(combine_partials(t, {all[0], all[1]}), std::runtime_error);
        CHECK_THROWS_AS(combine_partials(t, {all[0], all[1], all[1]}), std::invalid_argument);
        PartialSig off = all[2];
        off.r = key.pk;
        CHECK_THROWS_AS(combine_partials(t, {all[0], all[1], off}), std::invalid_argument);
        PartialSig zero = all[2];
        zero.signer = 0;
        CHECK_THROWS_AS(combine_partials(t, {all[0], all[1], zero}), std::invalid_argument);
        CHECK_THROWS_AS(combine_partials(-1, {all[0]}), std::invalid_argument);
    }
}

TEST_CASE("checkpoint: transaction serialization round-trips") {
    Drbg rng(to_bytes("checkpoint-test-wire"));
    Scalar x1 = Scalar::random(rng);
    Point q1 = pt_base_mul(x1);
    Point q2 = pt_base_mul(Scalar::random(rng));
    CheckpointTx tx = signed_tx(digest_bytes(digest_of("prev-tx")), q2, digest_of("block-9"),
                                x1, q1, rng);

    Bytes wire = tx.encode();
    CHECK(wire.size() == 162);
    auto back = CheckpointTx::decode(wire);
    REQUIRE(back.has_value());
    CHECK(back->input_ref == tx.input_ref);
    CHECK(pt_equal(back->output_key, tx.output_key));
    CHECK(back->op_return == tx.op_return);
    CHECK(pt_equal(back->sig.r, tx.sig.r));
    CHECK(back->sig.z == tx.sig.z);
    CHECK(back->txid() == tx.txid());
    CHECK(tx.txid() == digest_bytes(sha256(wire)));

    SUBCASE("length and field validation") {
        CHECK(!CheckpointTx::decode(Bytes()).has_value());
        CHECK(!CheckpointTx::decode(Bytes(wire.begin(), wire.end() - 1)).has_value());
        Bytes longer = wire;
        longer.push_back(0);
        CHECK(!CheckpointTx::decode(longer).has_value());

        Bytes bad_q = wire;
        bad_q[32] = 0x05;  // not a valid compressed-point prefix
        CHECK(!CheckpointTx::decode(bad_q).has_value());

        Bytes bad_r = wire;
        bad_r[97] = 0x05;
        CHECK(!CheckpointTx::decode(bad_r).has_value());

        Bytes bad_z = wire;
        for (size_t i = 130; i < 162; ++i) bad_z[i] = 0xff;  // above the group order
        CHECK(!CheckpointTx::decode(bad_z).has_value());
    }
    SUBCASE("the genesis transaction is all zeros outside its key and digest") {
        CheckpointTx gen = make_genesis(q1, digest_of("block-0"));
        Bytes gw = gen.encode();
        REQUIRE(gw.size() == 162);
        CHECK(Bytes(gw.begin(), gw.begin() + 32) == Bytes(32, 0));
        CHECK(Bytes(gw.begin() + 97, gw.end()) == Bytes(65, 0));
        auto gback = CheckpointTx::decode(gw);
        REQUIRE(gback.has_value());
        CHECK(gback->sig.r.is_infinity());
        CHECK(gback->sig.z.is_zero());
        CHECK(gback->txid() == gen.txid());
        // Unsigned by construction: the zero signature never verifies.
        CHECK(!schnorr_verify(q1, gen.body(), gen.sig));
    }
}

TEST_CASE("checkpoint: end-to-end epoch with generated key and nonce") {
    Drbg rng(to_bytes("checkpoint-test-epoch"));
    const int m = 5, t = 2;

    auto session = [&](const std::string& label) {
        SessionParams params;
        params.n = m;
        params.t = t;
        params.session_id = digest_bytes(sha256(to_bytes(label)));
        params.rand = digest_bytes(sha256(to_bytes(label + "-rand")));
        params.ratio = Ratio{1, 4};
        params.mode = SortitionMode::forced;
        params.forced_dealers = {1, 2};
        params.forced_agree = {3};
        std::vector<NodeKeys> keys;
        Drbg keygen(to_bytes("checkpoint-test-epoch-keys:" + label));
        for (int i = 0; i < m; ++i) keys.push_back(node_keygen(keygen));
        for (const auto& k : keys) params.roster.push_back(roster_entry(k));
        Drbg run_rng(to_bytes("checkpoint-test-epoch-run:" + label));
        return run_dkg(params, keys, run_rng);
    };

    auto outs_key = session("key");
    auto outs_nonce = session("nonce");
    REQUIRE(outs_key.size() == size_t(m));
    REQUIRE(outs_nonce.size() == size_t(m));
    for (int i = 1; i < m; ++i) {
        CHECK(pt_equal(outs_key[size_t(i)].pk, outs_key[0].pk));
        CHECK(pt_equal(outs_nonce[size_t(i)].pk, outs_nonce[0].pk));
    }

    Point q = outs_key[0].pk;
    Point r = outs_nonce[0].pk;
    Point q_next = pt_base_mul(Scalar::random(rng));
    Digest ckp = digest_of("checkpointed-block");
    Bytes prev(32, 0x11);
    Bytes msg = build_tx_body(prev, q_next, ckp);

    // Every signer derives the same challenge from its own outputs.
    Scalar c = schnorr_challenge(r, q, msg);
    for (int i = 0; i < m; ++i)
        CHECK(schnorr_challenge(outs_nonce[size_t(i)].pk, outs_key[size_t(i)].pk, msg) == c);

    std::vector<PartialSig> partials;
    for (int i = 0; i < m; ++i) {
        PartialSig p = partial_sign(uint32_t(i + 1), outs_nonce[size_t(i)].sk_share, r,
                                    outs_key[size_t(i)].sk_share, q, msg);
        CHECK(verify_partial(p, outs_nonce[size_t(i)].pk_shares[size_t(i)],
                             outs_key[size_t(i)].pk_shares[size_t(i)], c));
        partials.push_back(p);
    }

    SchnorrSig sig = combine_partials(t, {partials[0], partials[1], partials[2]});
    SchnorrSig sig2 = combine_partials(t, {partials[2], partials[3], partials[4]});
    CHECK(pt_equal(sig.r, sig2.r));
    CHECK(sig.z == sig2.z);
    CHECK(schnorr_verify(q, msg, sig));

    CheckpointTx tx;
    tx.input_ref = prev;
    tx.output_key = q_next;
    tx.op_return = ckp;
    tx.sig = sig;
    auto back = CheckpointTx::decode(tx.encode());
    REQUIRE(back.has_value());
    CHECK(schnorr_verify(q, back->body(), back->sig));

    SUBCASE("the driver rejects a mismatched roster") {
        SessionParams params;
        params.n = 3;
        std::vector<NodeKeys> two;
        Drbg keygen(to_bytes("checkpoint-test-epoch-short"));
        two.push_back(node_keygen(keygen));
        two.push_back(node_keygen(keygen));
        Drbg run_rng(to_bytes("checkpoint-test-epoch-short-run"));
        CHECK_THROWS_AS(run_dkg(params, two, run_rng), std::invalid_argument);
    }
}

TEST_CASE("checkpoint: bootstrap client follows the spend chain") {
    Drbg rng(to_bytes("checkpoint-test-chain"));
    Scalar x1 = Scalar::random(rng), x2 = Scalar::random(rng), x3 = Scalar::random(rng);
    Point q1 = pt_base_mul(x1), q2 = pt_base_mul(x2), q3 = pt_base_mul(x3);
    Digest d1 = digest_of("epoch-1"), d2 = digest_of("epoch-2"), d3 = digest_of("epoch-3");

    CheckpointTx genesis = make_genesis(q1, d1);
    CheckpointTx tx2 = signed_tx(genesis.txid(), q2, d2, x1, q1, rng);
    CheckpointTx tx3 = signed_tx(tx2.txid(), q3, d3, x2, q2, rng);

    InProcessPbb pbb;
    SUBCASE("an empty board has no genesis") {
        CHECK_THROWS_WITH_AS(bootstrap_verify(pbb, genesis.txid()),
                             "checkpoint: genesis transaction not found", std::runtime_error);
    }

    post_checkpoint(pbb, genesis);
    SUBCASE("an empty chain beyond genesis returns the genesis digest") {
        CHECK(bootstrap_verify(pbb, genesis.txid()) == d1);
    }

    post_checkpoint(pbb, tx2);
    post_checkpoint(pbb, tx3);
    CHECK(bootstrap_verify(pbb, genesis.txid()) == d3);

    SUBCASE("a stale-key spend after the output is consumed is ignored") {
        CheckpointTx attack = signed_tx(genesis.txid(), pt_base_mul(Scalar::random(rng)),
                                        digest_of("forged-epoch"), x1, q1, rng);
        CHECK(schnorr_verify(q1, attack.body(), attack.sig));  // old key really leaked
        post_checkpoint(pbb, attack);
        CHECK(bootstrap_verify(pbb, genesis.txid()) == d3);
    }
    SUBCASE("a spend of the tip that never verifies is a loud failure") {
        CheckpointTx bad = signed_tx(tx3.txid(), pt_base_mul(Scalar::random(rng)),
                                     digest_of("wrong-key-epoch"), x1, q1, rng);
        post_checkpoint(pbb, bad);
        CHECK_THROWS_WITH_AS(bootstrap_verify(pbb, genesis.txid()),
                             "checkpoint: no valid checkpoint at epoch 4", std::runtime_error);
    }
    SUBCASE("junk and duplicates under the checkpoint keyword are skipped") {
        pbb.post(checkpoint_keyword(), to_bytes("not a transaction"));
        Bytes truncated = tx3.encode();
        truncated.pop_back();
        pbb.post(checkpoint_keyword(), truncated);
        post_checkpoint(pbb, tx2);  // duplicate of an already-posted link
        CHECK(bootstrap_verify(pbb, genesis.txid()) == d3);
    }
    SUBCASE("an unknown genesis id is rejected") {
        CHECK_THROWS_WITH_AS(bootstrap_verify(pbb, Bytes(32, 0x77)),
                             "checkpoint: genesis transaction not found", std::runtime_error);
    }
}

TEST_CASE("checkpoint: forked spends resolve to the earliest valid transaction") {
    Drbg rng(to_bytes("checkpoint-test-fork"));
    Scalar x1 = Scalar::random(rng), xa = Scalar::random(rng), xb = Scalar::random(rng);
    Point q1 = pt_base_mul(x1), qa = pt_base_mul(xa), qb = pt_base_mul(xb);
    Digest da = digest_of("branch-a"), db = digest_of("branch-b");

    CheckpointTx genesis = make_genesis(q1, digest_of("root"));
    CheckpointTx tx_a = signed_tx(genesis.txid(), qa, da, x1, q1, rng);
    CheckpointTx tx_b = signed_tx(genesis.txid(), qb, db, x1, q1, rng);
    CHECK(schnorr_verify(q1, tx_b.body(), tx_b.sig));  // both branches really signed

    InProcessPbb pbb;
    post_checkpoint(pbb, genesis);
    post_checkpoint(pbb, tx_a);
    post_checkpoint(pbb, tx_b);
    CHECK(bootstrap_verify(pbb, genesis.txid()) == da);

    // Extending the losing branch does not resurrect it.
    CheckpointTx deeper = signed_tx(tx_b.txid(), pt_base_mul(Scalar::random(rng)),
                                    digest_of("branch-b-2"), xb, qb, rng);
    post_checkpoint(pbb, deeper);
    CHECK(bootstrap_verify(pbb, genesis.txid()) == da);
}

TEST_CASE("checkpoint: configuration sub-ID bookkeeping") {
    Configuration cfg;
    cfg.epoch = 3;
    cfg.validators = {{7, 6}, {9, 6}, {11, 6}, {13, 1}};
    cfg.allocation = allocate_sub_ids({6, 6, 6, 1});
    REQUIRE(cfg.allocation.d == std::vector<uint64_t>{2, 2, 2, 0});

    CHECK(cfg.total_sub_ids() == 6);
    CHECK(cfg.owner_of(1) == 7);
    CHECK(cfg.owner_of(2) == 7);
    CHECK(cfg.owner_of(3) == 9);
    CHECK(cfg.owner_of(6) == 11);
    CHECK_THROWS_AS(cfg.owner_of(0), std::invalid_argument);
    CHECK_THROWS_AS(cfg.owner_of(7), std::invalid_argument);

    CHECK(cfg.sub_id_range(0) == std::pair<uint32_t, uint32_t>{1, 2});
    CHECK(cfg.sub_id_range(1) == std::pair<uint32_t, uint32_t>{3, 2});
    CHECK(cfg.sub_id_range(3) == std::pair<uint32_t, uint32_t>{7, 0});
    CHECK_THROWS_AS(cfg.sub_id_range(4), std::invalid_argument);

    Configuration skewed = cfg;
    skewed.allocation.d.pop_back();
    CHECK_THROWS_AS(skewed.owner_of(1), std::invalid_argument);
    CHECK_THROWS_AS(skewed.sub_id_range(0), std::invalid_argument);
}
