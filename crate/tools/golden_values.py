"""Independent high-precision evaluation of the frozen test values.

Uses mpmath at 40 significant digits. Nothing here imports or mirrors the
Rust implementation; formulas are written out directly.
"""
import mpmath as mp

mp.mp.dps = 40


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


# special functions
show("gamma(4.2)", mp.gamma(4.2))
show("gamma(0.5)", mp.gamma(0.5))
for nu, x in [(4.1, 2.0), (0.2, 1.0), (0.0, 1e-6), (1.0, 0.5), (3.0, 10.0), (40.0, 1e-6),
              (40.0, 50.0), (0.5, 1.0), (2.5, 3.0), (1e-7, 1.5), (1.0000001, 0.7), (12.3, 0.01),
              (0.3, 50.0), (7.7, 25.0), (2.0, 2.0), (0.49, 2.0)]:
    show(f"K({nu},{x})", mp.besselk(nu, x))

# 1/Gamma(1+z) Taylor coefficients about 0
c = mp.taylor(lambda z: 1 / mp.gamma(1 + z), 0, 30)
print("rgamma1p coefficients:")
for k, ck in enumerate(c):
    print(f"  {k}: {mp.nstr(ck, 22)}")


# Gamma-Gamma fading
def gg_pdf_h(h, a, b):
    return 2 * (a * b) ** ((a + b) / 2) / (mp.gamma(a) * mp.gamma(b)) * h ** ((a + b) / 2 - 1) * mp.besselk(a - b, 2 * mp.sqrt(a * b * h))


show("gg_pdf_h(1; 2.2, 2)", gg_pdf_h(mp.mpf(1), mp.mpf(2.2), mp.mpf(2)))


def cdf_h(h, a, b):
    return mp.quad(lambda t: gg_pdf_h(t, a, b), [0, h])


def cdf_snr(g, a, b, gbar):
    return cdf_h(mp.sqrt(g / gbar), a, b)


def link_cdf(g, a, b, gbar):
    ab = a * b
    s = a + b
    return 4 * (ab / mp.sqrt(gbar)) ** (s / 2) / (s * mp.gamma(a) * mp.gamma(b)) * g ** (s / 4 - 1) * mp.besselk(a - b, 2 * mp.sqrt(mp.sqrt(ab * g) / mp.sqrt(gbar)))


show("link_cdf(5; 8.1, 4, 10)", link_cdf(mp.mpf(5), mp.mpf(8.1), mp.mpf(4), mp.mpf(10)))
show("ref_cdf(5; 8.1, 4, 10)", cdf_snr(mp.mpf(5), mp.mpf(8.1), mp.mpf(4), mp.mpf(10)))


def e2e_cdf(g, a, b, gsr, grd):
    ab = a * b
    s = a + b
    G = mp.gamma(a) * mp.gamma(b)
    ksr = mp.besselk(a - b, 2 * mp.sqrt(mp.sqrt(ab * g) / mp.sqrt(gsr)))
    krd = mp.besselk(a - b, 2 * mp.sqrt(mp.sqrt(ab * g) / mp.sqrt(grd)))
    xsr = (ab / mp.sqrt(gsr)) ** (s / 2)
    xrd = (ab / mp.sqrt(grd)) ** (s / 2)
    t1 = 4 * g ** (s / 4 - 1) / (s * G) * xsr * ksr
    t2 = 16 * (g ** (s / 2)) ** 2 / (s ** 2 * G ** 2) * xrd ** 2 * krd ** 2
    t3 = -64 * g ** (3 * s / 4) / (s ** 3 * G ** 3) * xsr * ksr * xrd ** 2 * krd ** 2
    return t1 + t2 + t3


def e2e_pdf(g, a, b, gsr, grd):
    ab = a * b
    s = a + b
    G = mp.gamma(a) * mp.gamma(b)
    ksr = mp.besselk(a - b, 2 * mp.sqrt(mp.sqrt(ab * g) / mp.sqrt(gsr)))
    krd = mp.besselk(a - b, 2 * mp.sqrt(mp.sqrt(ab * g) / mp.sqrt(grd)))
    xsr = (ab / mp.sqrt(gsr)) ** (s / 2)
    xrd = (ab / mp.sqrt(grd)) ** (s / 2)
    t1 = g ** (s / 4 - 1) / G * xsr * ksr
    t2 = 8 * (g ** (s / 2 - 1)) ** 2 / (s * G ** 2) * xrd ** 2 * krd ** 2
    t3 = -48 * g ** (3 * s / 4 - 1) / (s ** 2 * G ** 3) * xsr * ksr * xrd ** 2 * krd ** 2
    return t1 + t2 + t3


A, B = mp.mpf(8.1), mp.mpf(4)
show("e2e_cdf(3; 8.1, 4, 100, 100)", e2e_cdf(mp.mpf(3), A, B, mp.mpf(100), mp.mpf(100)))
show("e2e_pdf(3; 8.1, 4, 100, 100)", e2e_pdf(mp.mpf(3), A, B, mp.mpf(100), mp.mpf(100)))
show("e2e_cdf'(3) by differentiation", mp.diff(lambda g: e2e_cdf(g, A, B, mp.mpf(100), mp.mpf(100)), mp.mpf(3)))


def ref_e2e_min(g, a, b, gsr, grd):
    fsr = cdf_snr(g, a, b, gsr)
    frd = cdf_snr(g, a, b, grd)
    return fsr + frd * frd - fsr * frd * frd


for (a, b) in [(8.1, 4), (4.2, 3), (2.2, 2)]:
    for gbar in [10, 100, 1000]:
        for gout in [1, 3]:
            show(f"ref_outage_min({a},{b}; gbar={gbar}, gout={gout})", ref_e2e_min(mp.mpf(gout), mp.mpf(a), mp.mpf(b), mp.mpf(gbar), mp.mpf(gbar)))


def ergodic_min(a, b, gsr, grd):
    a, b = mp.mpf(a), mp.mpf(b)

    def sf(g):
        fsr = cdf_snr(g, a, b, gsr)
        frd = cdf_snr(g, a, b, grd)
        return (1 - fsr) * (1 - frd * frd)

    return mp.quad(lambda g: sf(g) / (1 + g), [0, 1, 10, 100, 1000, 1e4, 1e5, 1e6, mp.inf]) / mp.log(2)


mp.mp.dps = 20
show("capacity_min(8.1,4,100,100)", ergodic_min(8.1, 4, 100, 100))
show("capacity_min(2.2,2,100,100)", ergodic_min(2.2, 2, 100, 100))
mp.mp.dps = 40


def constants(a, b, gsr, grd):
    a, b = mp.mpf(a), mp.mpf(b)
    ab = a * b
    s = a + b
    ga, gb = mp.gamma(a), mp.gamma(b)
    R = 64 * (ab / mp.sqrt(gsr)) ** (s / 2) * (ab / mp.sqrt(grd)) ** s / (s ** 3 * ga ** 3 * gb ** 3)
    Q = 16 * (ab / mp.sqrt(grd)) ** s / (s ** 3 * ga ** 2 * gb ** 2)
    P = 4 * (ab / mp.sqrt(gsr)) ** (s / 2) / (s * ga * gb)
    Ac = 2 * mp.sqrt(mp.sqrt(ab) / mp.sqrt(gsr))
    Bc = 2 * mp.sqrt(mp.sqrt(ab) / mp.sqrt(grd))
    return P, Q, R, Ac, Bc


for name, v in zip("PQRAB", constants(2.2, 2, 50, 50)):
    show(f"const {name} (2.2,2,50,50)", v)


def capacity_closed(a, b, gsr, grd, x=1):
    P, Q, R, Ac, Bc = constants(a, b, gsr, grd)
    a, b = mp.mpf(a), mp.mpf(b)
    s = a + b
    nu = a - b
    ka = mp.besselk(nu, mp.root(Ac * x, 4))
    kb = mp.besselk(nu, mp.root(Bc * x, 4))
    csc = lambda t: 1 / mp.sin(t)
    return (mp.pi / mp.log(2) * (-R * ka * kb ** 2 * csc(3 * s * mp.pi / 4))
            + mp.pi / mp.log(2) * (Q * kb ** 2 * csc(s * mp.pi / 2))
            + P * ka * csc(s * mp.pi / 4))


show("capacity_closed(8.1,4,100,100)", capacity_closed(8.1, 4, 100, 100))

# turbulence from physics
cn2, lam, D, d = mp.mpf("1e-14"), mp.mpf("520e-9"), mp.mpf("0.01"), mp.mpf(50)
kappa = mp.mpf("0.5") * d ** (mp.mpf(11) / 6) * cn2 * (2 * mp.pi / lam)
k = 2 * mp.pi / lam
rho = mp.sqrt(2 * mp.pi * k * D ** 2 / (4 * lam) * d)
xi = 1
alpha = 1 / (mp.exp(mp.mpf("0.49") * kappa ** 2 / (1 + mp.mpf("0.18") * rho ** 2 + mp.mpf("0.56") * kappa ** (mp.mpf(12) / 5)) ** (mp.mpf(7) / 6)) - 1)
beta = 1 / (mp.exp(mp.mpf("0.51") * kappa ** 2 * (1 + mp.mpf("0.69") * kappa ** (mp.mpf(12) / 5)) ** (-mp.mpf(5) / 6)
                   / (1 + mp.mpf("0.9") * rho ** 2 + mp.mpf("0.62") * xi ** 2 * kappa ** (mp.mpf(12) / 5)) ** (mp.mpf(5) / 6)) - 1)
show("kappa", kappa)
show("rho", rho)
show("alpha", alpha)
show("beta", beta)

# noise model with the default environment
h_pl = mp.mpf("6.626e-34")
c0 = mp.mpf("2.998e8")
kb = mp.mpf("1.381e-23")
TB = mp.mpf(5778)


def chi(lam_m, T):
    return 2 * mp.pi * h_pl * c0 ** 2 / (lam_m ** 5 * (mp.exp(h_pl * c0 / (lam_m * kb * T)) - 1))


show("chi(520nm)/chi(700nm)", chi(mp.mpf("520e-9"), TB) / chi(mp.mpf("700e-9"), TB))
# Wien: x = 5(1 - e^-x) with x = hc/(lambda k T)
x_w = mp.findroot(lambda x: x - 5 * (1 - mp.exp(-x)), 5)
lmax = h_pl * c0 / (x_w * kb * TB)
show("argmax chi (m)", lmax)
l1, l2 = mp.mpf("0.38"), mp.mpf("0.78")
wmax = chi(lmax * 1, TB)  # peak lies inside [0.38, 0.78] um
S_peak = mp.mpf(1000)
xi_spec = mp.quad(lambda l: S_peak * chi(l * mp.mpf("1e-6"), TB) / wmax, [l1, l2])
show("spectral_fraction", xi_spec)

Qe = mp.mpf("1.602e-19")
Wn = mp.mpf("50e6")
WR = mp.mpf("0.562")
WRC = mp.mpf("0.0868")
T0 = 1
Tc = 1
fov_half = mp.pi / 3
g = mp.mpf("0.53")
Ta = mp.mpf(298)
Gol = mp.mpf(10)
eta = mp.mpf("1.12e-6")
Omega = mp.mpf("1.5")
gm = mp.mpf("0.03")
Apd = mp.mpf("1e-4")


def shot(P, h, Aarea):
    return 2 * g * Qe * Wn * (P * h + WR * xi_spec * T0 * Aarea * Tc * mp.sin(fov_half) ** 2)


def thermal(Aarea):
    return 8 * mp.pi * kb * Ta / Gol * eta * Aarea * WR ** 2 + 16 * mp.pi ** 2 * kb * Ta * Omega / gm * eta ** 2 * Aarea ** 2 * WRC * WR ** 3


h10 = 2 * Apd / (2 * mp.pi * 10)
show("shot(P=1, h=3.183e-6, A=1e-4)", shot(1, mp.mpf("3.183e-6"), Apd))
show("thermal(A=1e-4)", thermal(Apd))
show("h_lm(d=10)", h10)
sig = shot(1, h10, Apd) + thermal(Apd)
show("total(P=1, h(d=10))", sig)
show("avg_snr(d=10)", (g * h10 * 1) ** 2 / sig)
