#include <string.h>
void test(char *str)
{
    char buf[16];
    buf[15] = 0;
    int n = 16;
    n = n - 1;

    strcpy(buf, str);
}


int main(int argc, char **argv)
{
    char *src = argv[1];
    int code = 0;

    char *userstr = src;
    test(userstr);
    return code;
}
