extern const int GLOBAL_CONST_TRUE;

void CWE121_good() {
    char BadBuffer[50];
    char GoodBuffer[100];
    char *data = BadBuffer;
    if(GLOBAL_CONST_TRUE) {
        data = GoodBuffer;
    }
    char source[100];
    for (size_t i = 0; i < 100; i++) {
        data[i] = source[i];
    }
}
