"""Supersingular curve parameter sets.

Curve family: E: y^2 = x^3 + x over F_q, q prime, q = 3 (mod 4).  Such a curve
is supersingular with #E(F_q) = q + 1 and embedding degree 2; the distortion
map (x, y) -> (-x, iy), i^2 = -1, sends E(F_q) off itself inside E(F_{q^2}),
which is what makes the Tate pairing e(P, phi(Q)) symmetric and non-degenerate
on a single base-field subgroup.

Each set fixes q = h*p - 1 with p the (Solinas-form) prime group order and h
the cofactor, plus an order-p generator.  Constants were produced by
scripts/gen_params.py, which re-derives and re-verifies them deterministically.

ss1536 is the default: |q| = 1536 so F_{q^2} has ~3072 bits (~128-bit discrete
log) and |p| = 256 (~128-bit generic group security).  ss512 mirrors the
classic short parameterization of this curve family; it is fast but offers
roughly 80-bit security and exists for tests and development only.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class CurveParams:
    name: str
    q: int   # field prime, q = 3 mod 4
    p: int   # prime order of G0 (and G1)
    h: int   # cofactor: q + 1 = h * p
    gx: int  # generator of the order-p subgroup
    gy: int

    @property
    def field_bytes(self) -> int:
        return (self.q.bit_length() + 7) // 8


CURVES = {
    "ss512": CurveParams(
        name="ss512",
        q=0xa52df375791f76530245ecafa07b9ac4c502fd375d69190a06876072ae81e38423da9fb63f6630f4a190cf4233209b8e018ca59eb8b49da31125dab8d9f63747,
        p=0x8000008000000000000000000000000000000001,
        h=0x14a5be5a096594c0fab3fc9b4012d81885c84720fa1a857313804f78e018ca59eb8b49da31125dab8d9f63748,
        gx=0xe07ff4b1efb1f57187d3240f3d4bf2c2514d505395fa4cf013d025678976487d4b5db674809d2c5e80ed3cdbb2bed83c7b03d6258c581325c613446f7b8ef34,
        gy=0x7ac88c6c509d84449055b3f1d7455f4274f16327478995d9d7c7362c779e083c37303e5c3d7a5a502e7a757b2953f76bc05b61947b3af01da07bd0fa8b83e40c,
    ),
    "ss1536": CurveParams(
        name="ss1536",
        q=0xede4825e99401f6751d9f1a48185885668dff1aa8ea0335b691365d393ac097726d607edd895d122aea7ff7357e36eeb10c9fec1f8ae89bd217005795dc792ed2d7e2b7430c457cb8302c7a61483b51f8109eaeccdabfe511a539d7995b39584b59b5449b689c0639123edf87fdb4f0bf29241a0fe4df982ddfe9c7544c651ed1a47ad93528dc514f060ea7912f8938464a9f95b1fbb9dee3b0bbd235f8be95dfa2defdec4593bc63032a54693116e320854c9e261294eaae5d18f42a8f2301f,
        p=0x8008000000000000000000000000000000000000000000000000000000000001,
        h=0x1dbab4a0891f71f5cade904b8b77f98b3468b7a9d73693023cfe9cd0a56b2a7c01a53d68d246b1cda33dab7c9c42b69b8f8ed797173737bfae35e3afa5e83ee1b44a05fc81c30b2d770d912277e38b341dc1b2144a027023c4a26229c449b05228fccec34716b0467fa1616409f3b43dfeeef51c3a013ed4e52cbc6f590fd89bc792defdec4593bc63032a54693116e320854c9e261294eaae5d18f42a8f23020,
        gx=0x3395cd973876465be18ac519a67ce7b9809f5f417d0b040c1176654395805dbba003d9f87818f775c821896e4cee252b973a37c5c5bdf8268f10ca414c1d3a3c97f5f7b57fcbac23d1c02e0bb3536b4a8e8da21ba7869bed967e31cfba80c147c6618b84e1cbd986ffe0d0d226000dc0120a11183d995f3f83eb1968f620df8a6813eea34a930acf24ecf18b3b73e2cb55111fac64a9cf0d7cc7ec3179cb520d34097f8d58f80e7c27ec3ef731a67a02cfede680bf4f69b752dbffe89df89203,
        gy=0x87c9ccfe239afd4020681dda12a82238bc444bd5ced9b8979a069a1b5a24f7ec5c73d4f3f32de7e3b78aca4cc913f9f8a05447115e9893ad5c647ca896097297282e3a20bcadb773c6c1b95bf53922fba29e0e61f9fb8caea5c074a0f6f4dbd0180a2d8ac80ba4930e5a987cc6287ff923b148118a4e6576ab46c23526565b998838b1878ee49d16b831c1fc8642e1668ce1c28794d45a8a354c20dd3530e2bf443b51012785486a84698a79abeef9382bd807c980112be5e02de16cd6b09e06,
    ),
}

DEFAULT_CURVE = "ss1536"
