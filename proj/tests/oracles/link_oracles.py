"""Extended-precision reference values frozen into the C++ unit tests.

Run with: python3 tests/oracles/link_oracles.py
"""
import mpmath as mp

mp.mp.dps = 50


def ncdf(x):
    return mp.ncdf(x)


def main():
    print("probit log(1-G(40))   =", mp.nstr(mp.log(ncdf(-40)), 20))
    print("probit log(G(-40))    =", mp.nstr(mp.log(ncdf(-40)), 20))
    print("probit log(G(-38))    =", mp.nstr(mp.log(ncdf(-38)), 20))
    print("probit log(G(-30))    =", mp.nstr(mp.log(ncdf(-30)), 20))
    print("probit log(G(-10))    =", mp.nstr(mp.log(ncdf(-10)), 20))
    print("probit log(1-G(8))    =", mp.nstr(mp.log(1 - ncdf(8)), 20))
    print("probit log(G(3))      =", mp.nstr(mp.log(ncdf(3)), 20))
    print("Phi(1)-Phi(-1)        =", mp.nstr(ncdf(1) - ncdf(-1), 20))
    print("log(Phi(1)-Phi(-1))   =", mp.nstr(mp.log(ncdf(1) - ncdf(-1)), 20))
    print("probit quantile 0.975 =", mp.nstr(mp.sqrt(2) * mp.erfinv(2 * mp.mpf('0.975') - 1), 20))
    G = lambda x: 1 - mp.exp(-mp.exp(x))
    print("ev G(0)               =", mp.nstr(G(0), 20))
    print("ev g(0)               =", mp.nstr(mp.diff(G, 0), 20))
    print("ev g'(0)              =", mp.nstr(mp.diff(G, 0, 2), 20))
    print("ev g'(1)              =", mp.nstr(mp.diff(G, 1, 2), 20))
    print("ev log(G(-40))        =", mp.nstr(mp.log(G(-40)), 20))
    L = lambda x: 1 / (1 + mp.exp(-x))
    print("logit log(G(-40))     =", mp.nstr(mp.log(L(-40)), 20))
    print("logit quantile 0.7    =", mp.nstr(mp.log(mp.mpf(7) / 3), 20))
    print("binomial loglik (3,7) =", mp.nstr(3 * mp.log(mp.mpf('0.3')) + 7 * mp.log(mp.mpf('0.7')), 20))
    print("2x2 log odds ratio    =", mp.nstr(mp.log(mp.mpf(20 * 10) / (30 * 40)), 20))
    print("2x2 var               =", mp.nstr(mp.mpf(1) / 20 + mp.mpf(1) / 30 + mp.mpf(1) / 40 + mp.mpf(1) / 10, 20))


if __name__ == "__main__":
    main()
