import pytest

# Literal transcriptions used by several test modules.

R_PROG1_LISTING = """\
lazy_eval<-function(x=5,y=x*10,z=a+b){
  x=2
  a=3
  b=4
  c(x,y,z)
}

lazy_eval()
"""

R_PROG2_LISTING = """\
lazy1<-function(x=5,y=x*10){
x=2
print(y)
x=10
print(y)
}
lazy1()
"""

SAS_PROG1_LISTING = """\
%macro lazy(x=5,y=&x*10,z=&a+&b);
%put _user_
%let x=2;
%let a=3;
%let b=4;
%put (&x %eval(&y) %eval(&z));
%mend;

%lazy()
"""

SAS_PROG2_LISTING = """\
%macro lazy1(x=5,y=&x*10);
%let x=2;
%put %eval(&y);
%let x=10;
%put %eval(&y);

%mend;

%lazy1()
"""

ENV_LIFECYCLE_PROGRAM = """\
y <- 6
h <- function(x=1){
  a <- 2
  x + a
}
z <- h(1)
"""


@pytest.fixture
def r_prog1_listing():
    return R_PROG1_LISTING


@pytest.fixture
def r_prog2_listing():
    return R_PROG2_LISTING


@pytest.fixture
def sas_prog1_listing():
    return SAS_PROG1_LISTING


@pytest.fixture
def sas_prog2_listing():
    return SAS_PROG2_LISTING


@pytest.fixture
def env_lifecycle_program():
    return ENV_LIFECYCLE_PROGRAM
