from vecopula.families.classical import (
    FAMILIES,
    ClaytonCopula,
    Copula,
    FrankCopula,
    GaussianCopula,
    GumbelCopula,
    IndependenceCopula,
    classical_copula,
    tau_from_theta,
    theta_from_tau,
)
from vecopula.families.elliptical import (
    StudentVCParams,
    elliptical_mt_forward,
    elliptical_mt_inverse,
    student_vc_density,
    student_vc_logpdf,
    student_vc_sample,
)
from vecopula.families.extremal import extremal_cdf, extremal_sample
from vecopula.families.gaussian import (
    GaussianVCParams,
    gaussian_vc_density,
    gaussian_vc_logpdf,
    gaussian_vc_sample,
)
from vecopula.families.kendall import (
    KendallVCParams,
    kendall_vc_density,
    kendall_vc_logpdf,
    kendall_vc_sample,
)
from vecopula.families.monge_ampere import monge_ampere_residual

__all__ = [
    "FAMILIES",
    "ClaytonCopula",
    "Copula",
    "FrankCopula",
    "GaussianCopula",
    "GaussianVCParams",
    "GumbelCopula",
    "IndependenceCopula",
    "KendallVCParams",
    "StudentVCParams",
    "classical_copula",
    "elliptical_mt_forward",
    "elliptical_mt_inverse",
    "extremal_cdf",
    "extremal_sample",
    "gaussian_vc_density",
    "gaussian_vc_logpdf",
    "gaussian_vc_sample",
    "kendall_vc_density",
    "kendall_vc_logpdf",
    "kendall_vc_sample",
    "monge_ampere_residual",
    "student_vc_density",
    "student_vc_logpdf",
    "student_vc_sample",
    "tau_from_theta",
    "theta_from_tau",
]
