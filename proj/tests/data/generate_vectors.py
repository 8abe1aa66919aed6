#!/usr/bin/env python3
"""Independent reference for the conformance vectors in this directory.

Re-implements Philox4x32-10, the keyed block layout, the inverse-CDF symbol
draw and the Elias codes in plain Python, then writes CSV files that the C++
tests compare against byte for byte.
"""

import bisect
import os

M0, M1 = 0xD2511F53, 0xCD9E8D57
W0, W1 = 0x9E3779B9, 0xBB67AE85
MASK = 0xFFFFFFFF


def philox(ctr, key):
    c0, c1, c2, c3 = ctr
    k0, k1 = key
    for r in range(10):
        if r:
            k0 = (k0 + W0) & MASK
            k1 = (k1 + W1) & MASK
        p0 = M0 * c0
        p1 = M1 * c2
        c0, c1, c2, c3 = ((p1 >> 32) ^ c1 ^ k0, p1 & MASK, (p0 >> 32) ^ c3 ^ k1, p0 & MASK)
    return c0, c1, c2, c3


def keyed_block(key, a, b, domain):
    out = philox((a & MASK, a >> 32, b, domain), (key & MASK, key >> 32))
    return (out[0] << 32) | out[1], (out[2] << 32) | out[3]


def unit(bits):
    return (bits >> 11) * 2.0 ** -53


class Sampler:
    def __init__(self, probs):
        acc = 0.0
        self.cum = []
        self.last = 0
        for i, p in enumerate(probs):
            acc += p
            self.cum.append(acc)
            if p > 0:
                self.last = i
        self.cum = [c / acc for c in self.cum]

    def __call__(self, u):
        i = bisect.bisect_right(self.cum, u)
        return self.last if i == len(self.cum) else i


def codewords(labels, components, n, seed, t_last):
    comp = Sampler([w for w, _ in components])
    syms = [Sampler(p) for _, p in components]
    rows = []
    for t in range(1, t_last + 1):
        j = 0 if len(components) == 1 else comp(unit(keyed_block(seed, t, 0, 0)[0]))
        for u in range(1, n + 1):
            s = syms[j](unit(keyed_block(seed, t, u - 1, 1)[0]))
            rows.append(f"{t},{u},{labels[s]}")
    return rows


def gamma(t):
    b = bin(t)[2:]
    return "0" * (len(b) - 1) + b


def delta(t):
    b = bin(t)[2:]
    return gamma(len(b)) + b[1:]


def packed_hex(bits):
    bits = bits + "0" * (-len(bits) % 8)
    return "".join(f"{int(bits[i:i + 8], 2):02x}" for i in range(0, len(bits), 8))


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    assert philox((0, 0, 0, 0), (0, 0)) == (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)
    assert philox((MASK,) * 4, (MASK, MASK)) == (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)
    assert philox((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
                  (0xA4093822, 0x299F31D0)) == (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)

    with open(os.path.join(here, "elias_vectors.csv"), "w", newline="\n") as f:
        f.write("t,gamma,delta,gamma_bits,delta_bits,delta_packed_hex\n")
        for t in range(1, 65):
            g, d = gamma(t), delta(t)
            f.write(f"{t},{g},{d},{len(g)},{len(d)},{packed_hex(d)}\n")

    with open(os.path.join(here, "codewords_bernoulli.csv"), "w", newline="\n") as f:
        f.write("t,position,symbol\n")
        for row in codewords([0, 1], [(1.0, [0.7, 0.3])], 8, 42, 16):
            f.write(row + "\n")

    with open(os.path.join(here, "codewords_mixture.csv"), "w", newline="\n") as f:
        f.write("t,position,symbol\n")
        comps = [(0.5, [0.0, 1.0, 0.0]), (0.5, [0.5, 0.0, 0.5])]
        for row in codewords([0, 1, 2], comps, 6, 0x243F6A8885A308D3, 32):
            f.write(row + "\n")


if __name__ == "__main__":
    main()
