#include "beams/integrator.hpp"

#include "beams/errors.hpp"

#include <algorithm>
#include <cmath>

namespace beams {

using Eigen::VectorXd;

void DenseSolution::append(double s0, double h, Coefficients coeffs)
{
    starts_.push_back(s0);
    steps_.push_back(h);
    coeffs_.push_back(std::move(coeffs));
    end_ = s0 + h;
}

void DenseSolution::truncate(double s_cut)
{
    if (empty()) return;
    const std::size_t k = segment_of(s_cut);
    starts_.resize(k + 1);
    steps_.resize(k + 1);
    coeffs_.resize(k + 1);
    end_ = s_cut;
}

double DenseSolution::front() const { return starts_.front(); }

double DenseSolution::back() const { return end_; }

double DenseSolution::direction() const { return steps_.empty() || steps_.front() >= 0.0 ? 1.0 : -1.0; }

bool DenseSolution::contains(double s) const
{
    if (empty()) return false;
    const double dir = direction();
    const double slack = 1e-12 * (1.0 + std::abs(front()) + std::abs(back()));
    return (s - front()) * dir >= -slack && (back() - s) * dir >= -slack;
}

std::size_t DenseSolution::segment_of(double s) const
{
    const double dir = direction();
    std::size_t lo = 0;
    std::size_t hi = starts_.size();
    // Largest k with (s - starts_[k]) * dir >= 0.
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if ((s - starts_[mid]) * dir >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double DenseSolution::horner(const Coefficients& c, int row, double th, int deriv)
{
    double v = 0.0;
    if (deriv == 0) {
        for (int k = 7; k >= 0; --k) v = v * th + c(row, k);
    } else if (deriv == 1) {
        for (int k = 7; k >= 1; --k) v = v * th + k * c(row, k);
    } else {
        for (int k = 7; k >= 2; --k) v = v * th + k * (k - 1) * c(row, k);
    }
    return v;
}

VectorXd DenseSolution::eval(double s, int deriv, int first, int count) const
{
    if (empty()) fail(ErrorKind::DomainError, "empty dense solution");
    if (count < 0) count = dimension() - first;
    const std::size_t k = segment_of(s);
    const double h = steps_[k];
    const double th = (s - starts_[k]) / h;
    VectorXd out(count);
    for (int i = 0; i < count; ++i) out(i) = horner(coeffs_[k], first + i, th, deriv);
    for (int d = 0; d < deriv; ++d) out /= h;
    return out;
}

namespace {

// Dormand-Prince 8(5,3) tableau.
constexpr double c2 = 0.526001519587677318785587544488E-01, c3 = 0.789002279381515978178381316732E-01,
                 c4 = 0.118350341907227396726757197510E+00, c5 = 0.281649658092772603273242802490E+00,
                 c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                 c8 = 0.307692307692307692307692307692E+00, c9 = 0.651282051282051282051282051282E+00,
                 c10 = 0.6E+00, c11 = 0.857142857142857142857142857142E+00, c14 = 0.1E+00, c15 = 0.2E+00,
                 c16 = 0.777777777777777777777777777778E+00;

constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                 b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                 b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                 b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;

constexpr double bhh1 = 0.244094488188976377952755905512E+00, bhh2 = 0.733846688281611857341361741547E+00,
                 bhh3 = 0.220588235294117647058823529412E-01;

constexpr double er1 = 0.1312004499419488073250102996E-01, er6 = -0.1225156446376204440720569753E+01,
                 er7 = -0.4957589496572501915214079952E+00, er8 = 0.1664377182454986536961530415E+01,
                 er9 = -0.3503288487499736816886487290E+00, er10 = 0.3341791187130174790297318841E+00,
                 er11 = 0.8192320648511571246570742613E-01, er12 = -0.2235530786388629525884427845E-01;

constexpr double a21 = 5.26001519587677318785587544488E-2, a31 = 1.97250569845378994544595329183E-2,
                 a32 = 5.91751709536136983633785987549E-2, a41 = 2.95875854768068491816892993775E-2,
                 a43 = 8.87627564304205475450678981324E-2, a51 = 2.41365134159266685502369798665E-1,
                 a53 = -8.84549479328286085344864962717E-1, a54 = 9.24834003261792003115737966543E-1,
                 a61 = 3.7037037037037037037037037037E-2, a64 = 1.70828608729473871279604482173E-1,
                 a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                 a74 = 1.70252211019544039314978060272E-1, a75 = 6.02165389804559606850219397283E-2,
                 a76 = -1.7578125E-2, a81 = 3.70920001185047927108779319836E-2,
                 a84 = 1.70383925712239993810214054705E-1, a85 = 1.07262030446373284651809199168E-1,
                 a86 = -1.53194377486244017527936158236E-2, a87 = 8.27378916381402288758473766002E-3,
                 a91 = 6.24110958716075717114429577812E-1, a94 = -3.36089262944694129406857109825E0,
                 a95 = -8.68219346841726006818189891453E-1, a96 = 2.75920996994467083049415600797E1,
                 a97 = 2.01540675504778934086186788979E1, a98 = -4.34898841810699588477366255144E1,
                 a101 = 4.77662536438264365890433908527E-1, a104 = -2.48811461997166764192642586468E0,
                 a105 = -5.90290826836842996371446475743E-1, a106 = 2.12300514481811942347288949897E1,
                 a107 = 1.52792336328824235832596922938E1, a108 = -3.32882109689848629194453265587E1,
                 a109 = -2.03312017085086261358222928593E-2, a111 = -9.3714243008598732571704021658E-1,
                 a114 = 5.18637242884406370830023853209E0, a115 = 1.09143734899672957818500254654E0,
                 a116 = -8.14978701074692612513997267357E0, a117 = -1.85200656599969598641566180701E1,
                 a118 = 2.27394870993505042818970056734E1, a119 = 2.49360555267965238987089396762E0,
                 a1110 = -3.0467644718982195003823669022E0, a121 = 2.27331014751653820792359768449E0,
                 a124 = -1.05344954667372501984066689879E1, a125 = -2.00087205822486249909675718444E0,
                 a126 = -1.79589318631187989172765950534E1, a127 = 2.79488845294199600508499808837E1,
                 a128 = -2.85899827713502369474065508674E0, a129 = -8.87285693353062954433549289258E0,
                 a1210 = 1.23605671757943030647266201528E1, a1211 = 6.43392746015763530355970484046E-1;

constexpr double a141 = 5.61675022830479523392909219681E-2, a147 = 2.53500210216624811088794765333E-1,
                 a148 = -2.46239037470802489917441475441E-1, a149 = -1.24191423263816360469010140626E-1,
                 a1410 = 1.5329179827876569731206322685E-1, a1411 = 8.20105229563468988491666602057E-3,
                 a1412 = 7.56789766054569976138603589584E-3, a1413 = -8.298E-3;

constexpr double a151 = 3.18346481635021405060768473261E-2, a156 = 2.83009096723667755288322961402E-2,
                 a157 = 5.35419883074385676223797384372E-2, a158 = -5.49237485713909884646569340306E-2,
                 a1511 = -1.08347328697249322858509316994E-4, a1512 = 3.82571090835658412954920192323E-4,
                 a1513 = -3.40465008687404560802977114492E-4, a1514 = 1.41312443674632500278074618366E-1;

constexpr double a161 = -4.28896301583791923408573538692E-1, a166 = -4.69762141536116384314449447206E0,
                 a167 = 7.68342119606259904184240953878E0, a168 = 4.06898981839711007970213554331E0,
                 a169 = 3.56727187455281109270669543021E-1, a1613 = -1.39902416515901462129418009734E-3,
                 a1614 = 2.9475147891527723389556272149E0, a1615 = -9.15095847217987001081870187138E0;

constexpr double d41 = -0.84289382761090128651353491142E+01, d46 = 0.56671495351937776962531783590E+00,
                 d47 = -0.30689499459498916912797304727E+01, d48 = 0.23846676565120698287728149680E+01,
                 d49 = 0.21170345824450282767155149946E+01, d410 = -0.87139158377797299206789907490E+00,
                 d411 = 0.22404374302607882758541771650E+01, d412 = 0.63157877876946881815570249290E+00,
                 d413 = -0.88990336451333310820698117400E-01, d414 = 0.18148505520854727256656404962E+02,
                 d415 = -0.91946323924783554000451984436E+01, d416 = -0.44360363875948939664310572000E+01;

constexpr double d51 = 0.10427508642579134603413151009E+02, d56 = 0.24228349177525818288430175319E+03,
                 d57 = 0.16520045171727028198505394887E+03, d58 = -0.37454675472269020279518312152E+03,
                 d59 = -0.22113666853125306036270938578E+02, d510 = 0.77334326684722638389603898808E+01,
                 d511 = -0.30674084731089398182061213626E+02, d512 = -0.93321305264302278729567221706E+01,
                 d513 = 0.15697238121770843886131091075E+02, d514 = -0.31139403219565177677282850411E+02,
                 d515 = -0.93529243588444783865713862664E+01, d516 = 0.35816841486394083752465898540E+02;

constexpr double d61 = 0.19985053242002433820987653617E+02, d66 = -0.38703730874935176555105901742E+03,
                 d67 = -0.18917813819516756882830838328E+03, d68 = 0.52780815920542364900561016686E+03,
                 d69 = -0.11573902539959630126141871134E+02, d610 = 0.68812326946963000169666922661E+01,
                 d611 = -0.10006050966910838403183860980E+01, d612 = 0.77771377980534432092869265740E+00,
                 d613 = -0.27782057523535084065932004339E+01, d614 = -0.60196695231264120758267380846E+02,
                 d615 = 0.84320405506677161018159903784E+02, d616 = 0.11992291136182789328035130030E+02;

constexpr double d71 = -0.25693933462703749003312586129E+02, d76 = -0.15418974869023643374053993627E+03,
                 d77 = -0.23152937917604549567536039109E+03, d78 = 0.35763911791061412378285349910E+03,
                 d79 = 0.93405324183624310003907691704E+02, d710 = -0.37458323136451633156875139351E+02,
                 d711 = 0.10409964950896230045147246184E+03, d712 = 0.29840293426660503123344363579E+02,
                 d713 = -0.43533456590011143754432175058E+02, d714 = 0.96324553959188282948394950600E+02,
                 d715 = -0.39177261675615439165231486172E+02, d716 = -0.14972683625798562581422125276E+03;

constexpr double kSafe = 0.9, kFacMin = 1.0 / 3.0, kFacMax = 6.0, kExpo = 1.0 / 8.0;

bool is_domain_error(const Error& e) { return e.kind() == ErrorKind::DomainError; }

class Stepper {
public:
    Stepper(const OdeRhs& rhs, int n, const VectorXd& atol, double rtol)
        : rhs_(rhs), n_(n), atol_(atol), rtol_(rtol), ww_(n)
    {
        for (auto* k : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &k11, &k12, &fnew, &k14, &k15, &k16})
            k->resize(n);
        ynew.resize(n);
        bsum.resize(n);
    }

    void f(double s, const VectorXd& y, VectorXd& dy)
    {
        rhs_(s, y, dy);
        ++evals;
    }

    // Twelve stages, 8th-order update and scaled error norm.
    double step(double s, const VectorXd& y, double h)
    {
        ww_ = y + h * a21 * k1;
        f(s + c2 * h, ww_, k2);
        ww_ = y + h * (a31 * k1 + a32 * k2);
        f(s + c3 * h, ww_, k3);
        ww_ = y + h * (a41 * k1 + a43 * k3);
        f(s + c4 * h, ww_, k4);
        ww_ = y + h * (a51 * k1 + a53 * k3 + a54 * k4);
        f(s + c5 * h, ww_, k5);
        ww_ = y + h * (a61 * k1 + a64 * k4 + a65 * k5);
        f(s + c6 * h, ww_, k6);
        ww_ = y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
        f(s + c7 * h, ww_, k7);
        ww_ = y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
        f(s + c8 * h, ww_, k8);
        ww_ = y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
        f(s + c9 * h, ww_, k9);
        ww_ = y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9);
        f(s + c10 * h, ww_, k10);
        ww_ = y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 + a119 * k9 + a1110 * k10);
        f(s + c11 * h, ww_, k11);
        ww_ = y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 + a129 * k9 +
                       a1210 * k10 + a1211 * k11);
        f(s + h, ww_, k12);
        bsum = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
        ynew = y + h * bsum;

        double err = 0.0, err2 = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double sk = 1.0 / (atol_(i) + rtol_ * std::max(std::abs(y(i)), std::abs(ynew(i))));
            double q = (bsum(i) - bhh1 * k1(i) - bhh2 * k9(i) - bhh3 * k12(i)) * sk;
            err2 += q * q;
            q = (er1 * k1(i) + er6 * k6(i) + er7 * k7(i) + er8 * k8(i) + er9 * k9(i) + er10 * k10(i) + er11 * k11(i) +
                 er12 * k12(i)) * sk;
            err += q * q;
        }
        const double deno = err + 0.01 * err2;
        return std::abs(h) * err * std::sqrt(1.0 / (deno <= 0.0 ? n_ : deno * n_));
    }

    // Requires fnew = f(s + h, ynew).
    DenseSolution::Coefficients dense(double s, const VectorXd& y, double h)
    {
        const VectorXd ydiff = ynew - y;
        const VectorXd bspl = h * k1 - ydiff;
        VectorXd rc5 = d41 * k1 + d46 * k6 + d47 * k7 + d48 * k8 + d49 * k9 + d410 * k10 + d411 * k11 + d412 * k12;
        VectorXd rc6 = d51 * k1 + d56 * k6 + d57 * k7 + d58 * k8 + d59 * k9 + d510 * k10 + d511 * k11 + d512 * k12;
        VectorXd rc7 = d61 * k1 + d66 * k6 + d67 * k7 + d68 * k8 + d69 * k9 + d610 * k10 + d611 * k11 + d612 * k12;
        VectorXd rc8 = d71 * k1 + d76 * k6 + d77 * k7 + d78 * k8 + d79 * k9 + d710 * k10 + d711 * k11 + d712 * k12;

        ww_ = y + h * (a141 * k1 + a147 * k7 + a148 * k8 + a149 * k9 + a1410 * k10 + a1411 * k11 + a1412 * k12 +
                       a1413 * fnew);
        f(s + c14 * h, ww_, k14);
        ww_ = y + h * (a151 * k1 + a156 * k6 + a157 * k7 + a158 * k8 + a1511 * k11 + a1512 * k12 + a1513 * fnew +
                       a1514 * k14);
        f(s + c15 * h, ww_, k15);
        ww_ = y + h * (a161 * k1 + a166 * k6 + a167 * k7 + a168 * k8 + a169 * k9 + a1613 * fnew + a1614 * k14 +
                       a1615 * k15);
        f(s + c16 * h, ww_, k16);

        rc5 = h * (rc5 + d413 * fnew + d414 * k14 + d415 * k15 + d416 * k16);
        rc6 = h * (rc6 + d513 * fnew + d514 * k14 + d515 * k15 + d516 * k16);
        rc7 = h * (rc7 + d613 * fnew + d614 * k14 + d615 * k15 + d616 * k16);
        rc8 = h * (rc8 + d713 * fnew + d714 * k14 + d715 * k15 + d716 * k16);

        // Nested form y + th(rc2 + th1(rc3 + th(rc4 + th1(rc5 + th(rc6 + th1(rc7 + th rc8)))))) to powers of th.
        const VectorXd rc4 = ydiff - h * fnew - bspl;
        const std::array<const VectorXd*, 8> rc = {&y, &ydiff, &bspl, &rc4, &rc5, &rc6, &rc7, &rc8};
        DenseSolution::Coefficients P = DenseSolution::Coefficients::Zero(n_, 8);
        P.col(0) = rc8;
        const auto times_th = [&](DenseSolution::Coefficients& Q) {
            for (int k = 7; k >= 1; --k) Q.col(k) = Q.col(k - 1);
            Q.col(0).setZero();
        };
        const auto times_th1 = [&](DenseSolution::Coefficients& Q) {
            DenseSolution::Coefficients shifted = Q;
            times_th(shifted);
            Q -= shifted;
        };
        const std::array<int, 7> order = {6, 5, 4, 3, 2, 1, 0};
        for (int idx = 0; idx < 7; ++idx) {
            const int j = order[idx];
            if (idx % 2 == 0)
                times_th(P);
            else
                times_th1(P);
            P.col(0) += *rc[j];
        }
        return P;
    }

    long evals = 0;
    VectorXd k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, fnew, k14, k15, k16, ynew, bsum;

private:
    const OdeRhs& rhs_;
    int n_;
    VectorXd atol_;
    double rtol_;
    VectorXd ww_;
};

double initial_step(Stepper& st, double s, const VectorXd& y, const VectorXd& atol, double rtol, double hmax, double dir)
{
    const int n = static_cast<int>(y.size());
    double dnf = 0.0, dny = 0.0;
    for (int i = 0; i < n; ++i) {
        const double sk = atol(i) + rtol * std::abs(y(i));
        dnf += (st.k1(i) / sk) * (st.k1(i) / sk);
        dny += (y(i) / sk) * (y(i) / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax) * dir;
    const VectorXd y1 = y + h * st.k1;
    VectorXd f1(n);
    try {
        st.f(s + h, y1, f1);
    } catch (const Error& e) {
        if (!is_domain_error(e)) throw;
        return h * 1e-3;
    }
    double der2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double q = (f1(i) - st.k1(i)) / (atol(i) + rtol * std::abs(y(i)));
        der2 += q * q;
    }
    der2 = std::sqrt(der2) / std::abs(h);
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.125);
    return std::min(100.0 * std::abs(h), std::min(h1, hmax)) * dir;
}

}  // namespace

OdeResult integrate_dop853(const OdeRhs& rhs, double s0, const VectorXd& y0, double s_end, const OdeOptions& options,
                           const OdeEvent& event, const OdeStepHook& hook)
{
    const int n = static_cast<int>(y0.size());
    VectorXd atol = options.atol.size() == n ? options.atol : VectorXd::Constant(n, options.atol(0));
    const double rtol = options.rtol;
    const double dir = s_end >= s0 ? 1.0 : -1.0;
    const double hmax = std::min(options.h_max, std::abs(s_end - s0));

    OdeResult result;
    result.dense = std::make_shared<DenseSolution>();
    result.s_steps.push_back(s0);
    result.y_steps.push_back(y0);
    result.s_final = s0;
    result.y_final = y0;
    if (s_end == s0) return result;

    Stepper st(rhs, n, atol, rtol);
    st.f(s0, y0, st.k1);
    double s = s0;
    VectorXd y = y0;
    double h = options.h_init != 0.0 ? dir * std::abs(options.h_init) : initial_step(st, s, y, atol, rtol, hmax, dir);
    double g_prev = event ? event(s, y) : 0.0;
    bool reject = false;

    for (long nstep = 0;; ++nstep) {
        if (nstep > options.max_steps) fail(ErrorKind::ToleranceFailure, "integrator exceeded the maximum number of steps");
        if (std::abs(h) <= 1e-14 * std::max(1.0, std::abs(s))) {
            result.status = OdeStatus::DomainBoundary;
            break;
        }
        bool last = false;
        if ((s + 1.01 * h - s_end) * dir > 0.0) {
            h = s_end - s;
            last = true;
        }
        double err;
        try {
            err = st.step(s, y, h);
            if (!std::isfinite(err)) err = 1e10;
            if (err <= 1.0) st.f(s + h, st.ynew, st.fnew);
        } catch (const Error& e) {
            if (!is_domain_error(e)) throw;
            h *= 0.25;
            reject = true;
            ++result.rejected;
            continue;
        }
        const double fac11 = std::pow(err, kExpo);
        const double fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac11 / kSafe));
        double hnew = h / fac;
        if (err > 1.0) {
            hnew = h / std::min(1.0 / kFacMin, fac11 / kSafe);
            reject = true;
            ++result.rejected;
            h = hnew;
            continue;
        }
        DenseSolution::Coefficients coeffs;
        try {
            coeffs = st.dense(s, y, h);
        } catch (const Error& e) {
            if (!is_domain_error(e)) throw;
            h *= 0.25;
            reject = true;
            ++result.rejected;
            continue;
        }
        ++result.accepted;
        result.dense->append(s, h, std::move(coeffs));
        const double s_new = last ? s_end : s + h;
        VectorXd y_new = st.ynew;

        if (event) {
            const double g_new = event(s_new, y_new);
            if (g_prev != 0.0 && (g_new == 0.0 || (g_new > 0.0) != (g_prev > 0.0))) {
                double lo = s, hi = s_new, glo = g_prev;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    const double gm = event(mid, result.dense->eval(mid));
                    if (gm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((gm > 0.0) == (glo > 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                const double s_ev = hi;
                result.dense->truncate(s_ev);
                const VectorXd y_ev = result.dense->eval(s_ev);
                result.s_steps.push_back(s_ev);
                result.y_steps.push_back(y_ev);
                result.s_final = s_ev;
                result.y_final = y_ev;
                result.status = OdeStatus::EventHit;
                if (hook) hook(s_ev, y_ev);
                break;
            }
            g_prev = g_new;
        }

        s = s_new;
        y = y_new;
        st.k1 = st.fnew;
        result.s_steps.push_back(s);
        result.y_steps.push_back(y);
        result.s_final = s;
        result.y_final = y;
        if (hook) {
            try {
                hook(s, y);
            } catch (const Error& e) {
                if (!is_domain_error(e)) throw;
                result.status = OdeStatus::DomainBoundary;
                break;
            }
        }
        if (last) break;
        if (std::abs(hnew) > hmax) hnew = dir * hmax;
        if (reject) hnew = dir * std::min(std::abs(hnew), std::abs(h));
        reject = false;
        h = hnew;
    }
    result.rhs_evaluations = st.evals;
    return result;
}

}  // namespace beams
